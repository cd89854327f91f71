use std::fmt;

use hoa_core::HoaError;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(HoaError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

impl From<HoaError> for CliError {
    fn from(e: HoaError) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e @ HoaError::NotBracketed { suggested_lo, suggested_hi, .. }) => {
                format!("{e}; retry with --psi-grid {suggested_lo}:{suggested_hi}:61")
            }
            CliError::Core(e) => e.to_string(),
        };
        f.write_str(&text.replace('\n', " "))
    }
}
