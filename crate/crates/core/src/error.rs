use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    Range(String),

    #[error("threshold {tau} is below the construction floor tau_min = {tau_min}")]
    Threshold { tau: f64, tau_min: f64 },

    #[error("capacity exceeded: {what} would reach {needed}, cap `{cap_name}` is {cap}")]
    Capacity {
        what: &'static str,
        needed: usize,
        cap_name: &'static str,
        cap: usize,
    },

    #[error("{}", parse_location(.file, *.line, .msg))]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("invalid uncertain string `{name}`: {}", join_violations(.violations))]
    Invalid {
        name: String,
        violations: Vec<Violation>,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("index container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_location(file: &str, line: usize, msg: &str) -> String {
    if line == 0 {
        format!("{file}: {msg}")
    } else {
        format!("{file}:{line}: {msg}")
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
