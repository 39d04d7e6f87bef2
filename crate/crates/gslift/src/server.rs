//! Local HTTP service for interactive γ tuning over a precomputed `A`.
//!
//! State is the scene, the views, an optional contribution matrix and a cache
//! of assignments keyed by a content hash of (mode, γ). Nothing here
//! re-accumulates `A`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gslift_core::mask_render::render_mask;
use gslift_core::{remove_objects, Assignment, AssignmentMode, CameraView, ContributionMatrix, GaussianScene};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::masks::{encode_label_png, render_preview};
use crate::pipeline;
use crate::ply::export_ply;

pub struct AppState {
    pub scene: Arc<GaussianScene>,
    pub views: Vec<CameraView>,
    pub matrix: Option<Arc<ContributionMatrix>>,
    /// Where /remove writes edited scenes.
    pub out_dir: PathBuf,
    assignments: RwLock<HashMap<String, Arc<Assignment>>>,
}

impl AppState {
    pub fn new(scene: GaussianScene, views: Vec<CameraView>, matrix: Option<ContributionMatrix>, out_dir: PathBuf) -> Self {
        Self {
            scene: Arc::new(scene),
            views,
            matrix: matrix.map(Arc::new),
            out_dir,
            assignments: RwLock::new(HashMap::new()),
        }
    }

    fn view(&self, id: u32) -> Option<&CameraView> {
        self.views.iter().find(|v| v.view_id == id)
    }

    fn assignment(&self, token: &str) -> Option<Arc<Assignment>> {
        self.assignments.read().unwrap().get(token).cloned()
    }
}

/// Content hash of the only inputs besides `A` that an assignment depends on.
pub fn assignment_token(mode: AssignmentMode, gamma: f64) -> String {
    // -0.0 and 0.0 give the same assignment
    let gamma = if gamma == 0.0 { 0.0 } else { gamma };
    let digest = Sha256::digest(format!("{}:{:016x}", mode.as_str(), gamma.to_bits()).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn missing(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<gslift_core::Error> for ApiError {
    fn from(e: gslift_core::Error) -> Self {
        let status = match e {
            gslift_core::Error::Lookup(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl From<crate::Error> for ApiError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Core(c) => c.into(),
            other => Self::new(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad(format!("request body: {e}")))
}

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<T>> {
    q.get(key)
        .map(|v| v.parse().map_err(|_| ApiError::bad(format!("bad value for '{key}': {v}"))))
        .transpose()
}

fn required<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> ApiResult<T> {
    param(q, key)?.ok_or_else(|| ApiError::bad(format!("missing query parameter '{key}'")))
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

#[derive(Serialize, Deserialize)]
pub struct ViewInfo {
    pub view_id: u32,
    pub width: u32,
    pub height: u32,
}

#[derive(Serialize, Deserialize)]
pub struct SceneInfo {
    #[serde(rename = "N")]
    pub n: usize,
    /// `None` until a contribution matrix is loaded.
    #[serde(rename = "E")]
    pub e: Option<usize>,
    pub views: Vec<ViewInfo>,
}

async fn scene_info(State(s): State<Arc<AppState>>) -> Json<SceneInfo> {
    Json(SceneInfo {
        n: s.scene.len(),
        e: s.matrix.as_ref().map(|a| a.num_objects),
        views: s
            .views
            .iter()
            .map(|v| ViewInfo {
                view_id: v.view_id,
                width: v.width,
                height: v.height,
            })
            .collect(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignRequest {
    gamma: f64,
    mode: String,
}

#[derive(Serialize, Deserialize)]
pub struct AssignResponse {
    pub token: String,
    pub mode: String,
    pub gamma: f64,
    /// Members per object id, background first.
    pub counts: Vec<usize>,
}

async fn assign(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<AssignResponse>> {
    let req: AssignRequest = parse_body(&body)?;
    let mode: AssignmentMode = req.mode.parse()?;
    let matrix = s
        .matrix
        .clone()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no contribution matrix loaded"))?;
    let token = assignment_token(mode, req.gamma);
    let cached = s.assignment(&token);
    let assignment = match cached {
        Some(a) => a,
        None => {
            let gamma = req.gamma;
            let a = Arc::new(blocking(move || Ok(pipeline::assign(&matrix, gamma, mode)?)).await?);
            s.assignments.write().unwrap().entry(token.clone()).or_insert(a).clone()
        }
    };
    Ok(Json(AssignResponse {
        token,
        mode: mode.as_str().to_string(),
        gamma: assignment.gamma,
        counts: assignment.member_counts(),
    }))
}

async fn mask(State(s): State<Arc<AppState>>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Response> {
    let view_id: u32 = required(&q, "view")?;
    let token: String = required(&q, "token")?;
    let tau: f64 = param(&q, "tau")?.unwrap_or(gslift_core::DEFAULT_TAU);
    let view = s.view(view_id).cloned().ok_or_else(|| ApiError::missing(format!("no view {view_id}")))?;
    let assignment = s.assignment(&token).ok_or_else(|| ApiError::missing(format!("unknown token {token}")))?;
    let scene = s.scene.clone();
    let bytes = blocking(move || {
        let m = render_mask(&scene, &assignment, &view, tau)?;
        Ok(encode_label_png(m.width, m.height, &m.labels))
    })
    .await?;
    Ok(png(bytes))
}

async fn preview(State(s): State<Arc<AppState>>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Response> {
    let view_id: u32 = required(&q, "view")?;
    let view = s.view(view_id).cloned().ok_or_else(|| ApiError::missing(format!("no view {view_id}")))?;
    let scene = s.scene.clone();
    Ok(png(blocking(move || Ok(render_preview(&scene, &view)?)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RemoveRequest {
    object_ids: Vec<usize>,
    token: String,
}

#[derive(Serialize, Deserialize)]
pub struct RemoveResponse {
    pub path: String,
    pub remaining: usize,
}

async fn remove(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<RemoveResponse>> {
    let req: RemoveRequest = parse_body(&body)?;
    let assignment = s
        .assignment(&req.token)
        .ok_or_else(|| ApiError::missing(format!("unknown token {}", req.token)))?;
    let scene = s.scene.clone();
    let mut ids = req.object_ids.clone();
    ids.sort_unstable();
    ids.dedup();
    let tag: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    let path = s.out_dir.join(format!("removed-{}-{}.ply", req.token, tag.join("_")));
    let out = path.clone();
    let remaining = blocking(move || {
        let (edited, _) = remove_objects(&scene, &assignment, &ids)?;
        export_ply(&edited, &out)?;
        Ok(edited.len())
    })
    .await?;
    Ok(Json(RemoveResponse {
        path: path.display().to_string(),
        remaining,
    }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/scene", get(scene_info))
        .route("/assign", post(assign))
        .route("/mask", get(mask))
        .route("/preview", get(preview))
        .route("/remove", post(remove))
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
