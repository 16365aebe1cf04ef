use std::io::Write;

use serde::Serialize;
use serde_json::Value;

/// Common wrapper of every command's stdout.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    /// Effective configuration, defaults included.
    pub config: Value,
    pub payload: Value,
}

impl Envelope {
    pub fn new(command: &'static str, seed: Option<u64>, config: impl Serialize, payload: impl Serialize) -> alasso_core::Result<Self> {
        Ok(Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config: serde_json::to_value(config)?,
            payload: serde_json::to_value(payload)?,
        })
    }
}

/// Writes the envelope as one JSON line with 17-significant-digit floats.
pub fn print(envelope: &Envelope) -> alasso_core::Result<()> {
    let text = alasso_core::io::to_json_g17(envelope)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}
