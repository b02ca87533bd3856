//! Experiment driver for the holograph optical graph classifier: run
//! configuration, the sample store, the synthetic dataset and the
//! subcommands behind the `holograph` binary.

pub mod commands;
pub mod config;
pub mod data;
pub mod output;
pub mod synth;

pub use config::RunConfig;

/// Short category and exit code for an error chain.
pub fn error_category(err: &anyhow::Error) -> (&'static str, i32) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<holograph::Error>() {
            return match e {
                holograph::Error::InvalidArgument(_) => ("invalid argument", 2),
                holograph::Error::MissingFile(_) | holograph::Error::Parse { .. } => ("data error", 3),
                holograph::Error::Format { .. } => ("format error", 4),
                holograph::Error::Numeric { .. } => ("numeric error", 5),
                holograph::Error::Io(_) => ("io error", 6),
            };
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() || cause.downcast_ref::<config::ConfigError>().is_some() {
            return ("config error", 2);
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return ("format error", 4);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ("io error", 6);
        }
    }
    ("error", 1)
}
