use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cellshield::Error),
}

impl CliError {
    /// 2 input error, 3 not computable, 4 degenerate grid.
    pub fn exit_code(&self) -> u8 {
        use cellshield::Error as E;
        match self {
            CliError::Core(E::NotComputable(_) | E::RegularizationRequired) => 3,
            CliError::Core(E::DegenerateGrid(_)) => 4,
            _ => 2,
        }
    }
}
