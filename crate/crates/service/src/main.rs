use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use waso_service::{router, Store};

#[derive(Parser)]
#[command(name = "waso-service", version, about = "Group planning sessions over HTTP")]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Keep a JSON snapshot of every session here and reload them on start.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let store = match args.data_dir {
        Some(dir) => Store::persistent(dir)?,
        None => Store::in_memory(),
    };
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(store))).await?;
    Ok(())
}
