//! HTTP binding: every request goes through [`Service::handle`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;

use crate::api::{Request, Service};

async fn forward(State(svc): State<Arc<Service>>, method: Method, uri: Uri, headers: HeaderMap, body: Bytes) -> Response {
    let target = uri.path_and_query().map_or(uri.path(), |p| p.as_str());
    let mut req = Request::new(method.as_str(), target).body(body.to_vec());
    for (name, value) in &headers {
        if let Ok(v) = value.to_str() {
            req = req.header(name.as_str(), v);
        }
    }
    let svc = svc.clone();
    let out = tokio::task::spawn_blocking(move || svc.handle(&req)).await.expect("handler panicked");
    let status = StatusCode::from_u16(out.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, out.content_type)], out.body).into_response()
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new().fallback(forward).with_state(svc)
}

pub async fn serve(svc: Arc<Service>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(svc)).await
}
