use std::fmt;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Usage = 1,
    Data = 2,
    Provider = 3,
}

/// An error tagged with the exit status it should produce.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(status: Status, error: impl Into<anyhow::Error>) -> Self {
        Self {
            status,
            error: error.into(),
        }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        Self::new(Status::Usage, anyhow::anyhow!("{message}"))
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self::new(Status::Data, anyhow::anyhow!("{message}"))
    }

    pub fn code(&self) -> i32 {
        self.status as i32
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub trait Classify<T> {
    fn or_status(self, status: Status) -> Result<T, Failure>;

    fn or_usage(self) -> Result<T, Failure>
    where
        Self: Sized,
    {
        self.or_status(Status::Usage)
    }

    fn or_data(self) -> Result<T, Failure>
    where
        Self: Sized,
    {
        self.or_status(Status::Data)
    }
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_status(self, status: Status) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(status, e))
    }
}
