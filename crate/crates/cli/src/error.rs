use nullpass_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
/// Usage errors, unreadable or invalid scenario files.
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BOUNDS: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Scenario(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Scenario(_) | AppError::Io(_) => EXIT_USAGE,
            AppError::Infeasible(_) => EXIT_INFEASIBLE,
            AppError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn scenario(msg: impl Into<String>) -> Self {
        AppError::Scenario(msg.into())
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Infeasible(_) | CoreError::SingularStokes | CoreError::UndrivablePump(_) | CoreError::ZeroEta => {
                AppError::Infeasible(msg)
            }
            CoreError::Decomposition
            | CoreError::TrackingLost { .. }
            | CoreError::GridTooShort { .. }
            | CoreError::StepUnderflow { .. }
            | CoreError::Tolerance(_) => AppError::Numerical(msg),
            _ => AppError::Scenario(msg),
        }
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Scenario(e.to_string())
    }
}
