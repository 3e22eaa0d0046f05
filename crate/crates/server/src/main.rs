use std::sync::Arc;

use clap::Parser;
use evac_service::{router, ServerArgs};

#[tokio::main]
async fn main() {
    let args = ServerArgs::parse();
    let desk = match args.dispatcher() {
        Ok(d) => Arc::new(d),
        Err(e) => {
            eprintln!("evac-service: {e}");
            std::process::exit(1);
        }
    };
    let listener = match tokio::net::TcpListener::bind(args.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("evac-service: cannot listen on {}: {e}", args.listen);
            std::process::exit(1);
        }
    };
    eprintln!("evac-service listening on {}", args.listen);
    let app = router(desk, args.tokens());
    if let Err(e) = axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    {
        eprintln!("evac-service: {e}");
        std::process::exit(1);
    }
}
