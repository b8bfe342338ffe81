//! Builds a snapshot from the bundled county and serves the HTTP API.
//!
//! ```text
//! cargo run --release --example serve_api [-- 127.0.0.1:8080]
//! curl 'http://127.0.0.1:8080/vri?t=40&qd=2&qa=2&qb=1'
//! ```

use std::net::SocketAddr;
use std::sync::Arc;

use cvri::pipeline::{run_pipeline, ProjectConfig, Stage};
use cvri::synth::bundled_dir;

#[tokio::main]
async fn main() -> cvri::Result<()> {
    let addr: SocketAddr = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "127.0.0.1:8080".into())
        .parse()
        .map_err(|e| cvri::Error::Config(format!("bind address: {e}")))?;
    let config = ProjectConfig::load(bundled_dir().join("config.toml"))?;
    let out = std::env::temp_dir().join("cvri-serve");
    let stages = [Stage::Fit, Stage::Simulate, Stage::Map, Stage::Assess];
    let snapshot = run_pipeline(&config, &stages, &out)?
        .snapshot
        .expect("assess leaves a complete snapshot");
    println!("snapshot {} on http://{addr}", snapshot.content_hash());
    println!("try /meta, /layers/demographic, /vri?t=40, /buildings?t=40, /frames.png?t=40");
    cvri::service::serve(Arc::new(snapshot), addr).await
}
