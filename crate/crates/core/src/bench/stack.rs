//! A mock upstream and an invoker served over loopback HTTP in one process.

use std::sync::Arc;
use std::time::Duration;

use tokio::net::TcpListener;
use tokio::runtime::Runtime;

use super::mock::{self, MockUpstream};
use crate::invoker::{http, Invoker, InvokerConfig};
use crate::upstream::HttpUpstream;

pub struct LocalStack {
    pub invoker: Arc<Invoker>,
    pub invoker_url: String,
    pub mock_url: String,
    _runtime: Runtime,
}

impl LocalStack {
    /// Binds both servers to ephemeral loopback ports. The invoker reaches
    /// the mock over HTTP.
    pub fn start(config: InvokerConfig, mock_delay: Duration) -> std::io::Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
        let (mock_listener, inv_listener) = runtime.block_on(async {
            Ok::<_, std::io::Error>((TcpListener::bind("127.0.0.1:0").await?, TcpListener::bind("127.0.0.1:0").await?))
        })?;
        let mock_url = format!("http://{}", mock_listener.local_addr()?);
        let invoker_url = format!("http://{}", inv_listener.local_addr()?);
        let invoker = Arc::new(Invoker::new(config, Arc::new(HttpUpstream::new(&mock_url))));
        let m = Arc::new(MockUpstream::new(mock_delay));
        runtime.spawn(async move { axum::serve(mock_listener, mock::router(m)).await });
        let inv = invoker.clone();
        runtime.spawn(async move { axum::serve(inv_listener, http::router(inv)).await });
        Ok(LocalStack {
            invoker,
            invoker_url,
            mock_url,
            _runtime: runtime,
        })
    }
}
