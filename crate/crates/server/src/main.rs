use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;
use tracing_subscriber::EnvFilter;
use uptrendz_core::catalog::log::Durability;
use uptrendz_core::gateway::{Gateway, GatewayOptions};
use uptrendz_core::Platform;
use uptrendz_server::{parse_config_documents, router, AppState};

/// Multi-domain recommendation service.
#[derive(Parser, Debug)]
#[command(name = "uptrendz", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "UPTRENDZ_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Data directory; domains are kept in memory only when omitted.
    #[arg(long, env = "UPTRENDZ_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Declarative configuration document loaded at startup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fsync every log append instead of flushing to the OS.
    #[arg(long)]
    sync: bool,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();
    let durability = if args.sync { Durability::Sync } else { Durability::Flush };

    let platform = match &args.data_dir {
        Some(dir) => {
            let (platform, reports) = Platform::open(dir, durability)
                .with_context(|| format!("opening data directory {}", dir.display()))?;
            for r in reports {
                tracing::info!(domain = %r.domain, records = r.records, corrupt = r.corruption.is_some(), "replayed");
            }
            platform
        }
        None => Platform::in_memory(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for doc in parse_config_documents(&text).context("parsing configuration document")? {
            let id = doc.domain.id.clone();
            let created = platform.apply_document(&doc).with_context(|| format!("applying domain {id}"))?;
            tracing::info!(domain = %id, created, "configuration loaded");
        }
    }

    let platform = Arc::new(platform);
    let options = GatewayOptions::from_env();
    tracing::info!(?options, "gateway");
    let gateway = Arc::new(Gateway::new(platform.clone(), options));
    let app = router(AppState::new(platform, gateway));
    let listener = tokio::net::TcpListener::bind(args.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
