//! Session-oriented HTTP API.
//!
//! Every response body is a JSON object carrying the session `revision`
//! (0 where no session is involved). Mutations on one session are
//! serialized by its lock; reads clone the session under the lock and
//! compute on the copy, so a read always reflects exactly one revision.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use argora_core::abduction::Tier;
use argora_core::Theory;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::packs::{self, PACKS};
use crate::session::{self, ErrorKind, Session, SessionError};

pub struct AppState {
    packs: BTreeMap<String, Theory>,
    /// Pack used when a create request names none.
    default_pack: Option<String>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_id: Mutex<u64>,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    /// All shipped packs, plus `extra` under its own name as the default.
    pub fn new(extra: Option<(String, Theory)>) -> Self {
        let mut packs: BTreeMap<String, Theory> = PACKS
            .iter()
            .filter_map(|p| Some((p.name.to_string(), packs::load_pack(p.name).ok()?)))
            .collect();
        let default_pack = extra.map(|(name, theory)| {
            packs.insert(name.clone(), theory);
            name
        });
        AppState {
            packs,
            default_pack,
            sessions: RwLock::new(BTreeMap::new()),
            next_id: Mutex::new(1),
            snapshot_dir: None,
        }
    }

    /// Persist sessions as one snapshot file each under `dir`, restoring
    /// any snapshots already there.
    pub fn with_snapshots(mut self, dir: PathBuf) -> std::io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        let mut restored = BTreeMap::new();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("arg") {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            let s = Session::restore(&text, &path.to_string_lossy())
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.message))?;
            restored.insert(s.id.clone(), Arc::new(Mutex::new(s)));
        }
        let next = restored
            .keys()
            .filter_map(|k| k.strip_prefix('s')?.parse::<u64>().ok())
            .max()
            .map_or(1, |n| n + 1);
        self.sessions = RwLock::new(restored);
        self.next_id = Mutex::new(next);
        self.snapshot_dir = Some(dir);
        Ok(self)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| {
                ApiError::plain(
                    ErrorKind::NotFound,
                    "unknown-session",
                    format!("no session {id}"),
                )
            })
    }

    fn persist(&self, s: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.snapshot_dir else {
            return Ok(());
        };
        std::fs::write(dir.join(format!("{}.arg", s.id)), s.snapshot()).map_err(|e| ApiError {
            error: SessionError::new(ErrorKind::Engine, "snapshot", e.to_string()),
            revision: Some(s.revision),
        })
    }
}

struct ApiError {
    error: SessionError,
    revision: Option<u64>,
}

impl ApiError {
    fn plain(kind: ErrorKind, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            error: SessionError::new(kind, code, message),
            revision: None,
        }
    }

    fn at(error: SessionError, revision: u64) -> Self {
        ApiError {
            error,
            revision: Some(revision),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::plain(ErrorKind::BadRequest, "bad-body", r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::plain(ErrorKind::BadRequest, "bad-query", r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.error.kind {
            ErrorKind::BadRequest => StatusCode::BAD_REQUEST,
            ErrorKind::NotFound => StatusCode::NOT_FOUND,
            ErrorKind::Conflict => StatusCode::CONFLICT,
            ErrorKind::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorKind::Engine => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let doc = self.error.doc(Some(self.revision.unwrap_or(0)));
        (status, Json(serde_json::to_value(doc).unwrap())).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

/// `body` as an object with `revision` added.
fn with_revision<T: Serialize>(body: &T, revision: u64) -> Json<Value> {
    let mut v = serde_json::to_value(body).expect("documents serialize");
    if let Value::Object(m) = &mut v {
        m.insert("revision".into(), revision.into());
    }
    Json(v)
}

fn parse_all(texts: &[String], revision: u64) -> Result<Vec<argora_core::Literal>, ApiError> {
    texts
        .iter()
        .map(|t| session::literal(t).map_err(|e| ApiError::at(e, revision)))
        .collect()
}

#[derive(Deserialize)]
struct CreateBody {
    pack: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Created {
    session_id: String,
}

async fn create(
    State(st): State<Arc<AppState>>,
    body: Result<Json<CreateBody>, JsonRejection>,
) -> ApiResult {
    let Json(body) = body?;
    let name = body
        .pack
        .or_else(|| st.default_pack.clone())
        .ok_or_else(|| ApiError::plain(ErrorKind::BadRequest, "bad-body", "missing pack"))?;
    let theory = st.packs.get(&name).cloned().ok_or_else(|| {
        ApiError::plain(
            ErrorKind::NotFound,
            "unknown-pack",
            format!("unknown pack {name}"),
        )
    })?;
    let id = {
        let mut n = st.next_id.lock().unwrap();
        let id = format!("s{n}");
        *n += 1;
        id
    };
    let s = Session::new(id.clone(), name, theory);
    st.persist(&s)?;
    st.sessions
        .write()
        .unwrap()
        .insert(id.clone(), Arc::new(Mutex::new(s)));
    Ok(with_revision(&Created { session_id: id }, 0))
}

async fn hydrate(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let s = st.session(&id)?;
    let doc = s.lock().unwrap().doc();
    Ok(Json(serde_json::to_value(doc).unwrap()))
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct EvidenceBody {
    assert: Vec<String>,
    retract: Vec<String>,
}

async fn evidence(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<EvidenceBody>, JsonRejection>,
) -> ApiResult {
    let s = st.session(&id)?;
    let Json(body) = body?;
    let mut s = s.lock().unwrap();
    let rev = s.revision;
    let assert = parse_all(&body.assert, rev)?;
    let retract = parse_all(&body.retract, rev)?;
    let rev = s
        .evidence(&assert, &retract)
        .map_err(|e| ApiError::at(e, rev))?;
    st.persist(&s)?;
    Ok(with_revision(&serde_json::json!({}), rev))
}

#[derive(Deserialize)]
struct PriorityBody {
    label: String,
    higher: String,
    lower: String,
    #[serde(default)]
    when: Vec<String>,
}

async fn priorities(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<PriorityBody>, JsonRejection>,
) -> ApiResult {
    let s = st.session(&id)?;
    let Json(body) = body?;
    let mut s = s.lock().unwrap();
    let rev = s.revision;
    let when = parse_all(&body.when, rev)?;
    let rev = s
        .add_priority(&body.label, &body.higher, &body.lower, when)
        .map_err(|e| ApiError::at(e, rev))?;
    st.persist(&s)?;
    Ok(with_revision(&serde_json::json!({}), rev))
}

/// A consistent copy of the session to compute on.
fn snapshot_of(st: &AppState, id: &str) -> Result<Session, ApiError> {
    let s = st.session(id)?;
    let copy = s.lock().unwrap().clone();
    Ok(copy)
}

#[derive(Deserialize)]
struct GoalParams {
    goal: String,
    #[serde(default)]
    hints: usize,
}

async fn query(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<GoalParams>, QueryRejection>,
) -> ApiResult {
    let s = snapshot_of(&st, &id)?;
    let Query(p) = params?;
    let run = || -> session::Result<_> { s.query(&session::literal(&p.goal)?) };
    let verdicts = run().map_err(|e| ApiError::at(e, s.revision))?;
    Ok(with_revision(
        &serde_json::json!({ "verdicts": verdicts }),
        s.revision,
    ))
}

async fn explain(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<GoalParams>, QueryRejection>,
) -> ApiResult {
    let s = snapshot_of(&st, &id)?;
    let Query(p) = params?;
    let run = || -> session::Result<_> { s.explain(&session::literal(&p.goal)?, p.hints) };
    let doc = run().map_err(|e| ApiError::at(e, s.revision))?;
    Ok(with_revision(&doc, s.revision))
}

async fn conflicts(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let s = snapshot_of(&st, &id)?;
    let reports = s.conflicts();
    let unresolved = reports.iter().filter(|r| !r.resolution.decided).count();
    Ok(with_revision(
        &serde_json::json!({ "conflicts": reports, "unresolved": unresolved }),
        s.revision,
    ))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct AbduceBody {
    goal: String,
    tier: Option<String>,
    max_size: Option<usize>,
}

async fn abduce(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<AbduceBody>, JsonRejection>,
) -> ApiResult {
    let s = snapshot_of(&st, &id)?;
    let Json(body) = body?;
    let tier = match body.tier.as_deref() {
        None => Tier::Sceptical,
        Some(t) => Tier::parse(t).ok_or_else(|| {
            ApiError::at(
                SessionError::new(ErrorKind::BadRequest, "bad-tier", format!("unknown tier {t}")),
                s.revision,
            )
        })?,
    };
    let run = || -> session::Result<_> {
        s.abduce(&session::literal(&body.goal)?, tier, body.max_size.unwrap_or(2))
    };
    let doc = run().map_err(|e| ApiError::at(e, s.revision))?;
    Ok(with_revision(&doc, s.revision))
}

async fn list_packs(State(st): State<Arc<AppState>>) -> ApiResult {
    let names: Vec<&String> = st.packs.keys().collect();
    Ok(with_revision(&serde_json::json!({ "packs": names }), 0))
}

/// The API routes, with CORS for `allow_origin` (`*` for any) and static
/// files from `ui_dir` when given.
pub fn router(state: Arc<AppState>, allow_origin: Option<&str>, ui_dir: Option<PathBuf>) -> Router {
    let mut app = Router::new()
        .route("/packs", get(list_packs))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(hydrate))
        .route("/sessions/{id}/evidence", post(evidence))
        .route("/sessions/{id}/query", get(query))
        .route("/sessions/{id}/explain", get(explain))
        .route("/sessions/{id}/conflicts", get(conflicts))
        .route("/sessions/{id}/priorities", post(priorities))
        .route("/sessions/{id}/abduce", post(abduce))
        .with_state(state);
    if let Some(dir) = ui_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    if let Some(origin) = allow_origin {
        let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
        let cors = if origin == "*" {
            cors.allow_origin(Any)
        } else {
            match HeaderValue::from_str(origin) {
                Ok(v) => cors.allow_origin(v),
                Err(_) => cors,
            }
        };
        app = app.layer(cors);
    }
    app
}

/// Bind and serve until the process is stopped.
pub async fn serve(app: Router, host: &str, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use axum::body::Body;
    use axum::http::Request;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    fn app() -> Router {
        router(Arc::new(AppState::new(None)), Some("*"), None)
    }

    async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (u16, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(match body {
                Some(b) => Body::from(b.to_string()),
                None => Body::empty(),
            })
            .unwrap();
        let resp = app.clone().oneshot(req).await.unwrap();
        let status = resp.status().as_u16();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    async fn session(app: &Router, pack: &str) -> String {
        let (code, v) = call(app, "POST", "/sessions", Some(serde_json::json!({ "pack": pack }))).await;
        assert_eq!(code, 200);
        v["sessionId"].as_str().unwrap().to_string()
    }

    #[tokio::test]
    async fn unknown_pack_is_404() {
        let app = app();
        let (code, v) = call(&app, "POST", "/sessions", Some(serde_json::json!({"pack": "nope"}))).await;
        assert_eq!(code, 404);
        assert_eq!(v["code"], "unknown-pack");
        assert!(v["revision"].is_u64());
    }

    #[tokio::test]
    async fn ehealth_treating_doctor_is_denied() {
        let app = app();
        let id = session(&app, "ehealth").await;
        let ev = serde_json::json!({"assert": ["treatD(d,p)", "owner(p,x)", "pData(x)"]});
        let (code, v) = call(&app, "POST", &format!("/sessions/{id}/evidence"), Some(ev)).await;
        assert_eq!(code, 200, "{v}");
        assert_eq!(v["revision"], 1);
        let (code, v) = call(&app, "GET", &format!("/sessions/{id}/query?goal=access(x,d,S)"), None).await;
        assert_eq!(code, 200, "{v}");
        let verdicts = v["verdicts"].as_array().unwrap();
        let denied = verdicts
            .iter()
            .find(|d| d["goal"] == "access(x,d,denied)")
            .unwrap();
        assert_eq!(denied["status"], "accepted");
        assert_eq!(v["revision"], 1);
    }

    #[tokio::test]
    async fn assert_retract_and_contradiction() {
        let app = app();
        let id = session(&app, "attribution-text").await;
        let ev = format!("/sessions/{id}/evidence");
        let q = format!("/sessions/{id}/query?goal=perform(a,c1)");
        call(&app, "POST", &ev, Some(serde_json::json!({"assert": ["sourceIP(a,ip1)", "geoloc(ip1,c1)"]}))).await;
        let (_, before) = call(&app, "GET", &q, None).await;
        let (_, v) = call(&app, "POST", &ev, Some(serde_json::json!({"assert": ["spoofed(ip1)"]}))).await;
        assert_eq!(v["revision"], 2);
        let (_, mid) = call(&app, "GET", &q, None).await;
        assert_eq!(mid["verdicts"][0]["status"], "rejected");
        let (code, v) = call(&app, "POST", &ev, Some(serde_json::json!({"assert": ["neg spoofed(ip1)"]}))).await;
        assert_eq!(code, 409);
        assert_eq!(v["revision"], 2);
        let (_, v) = call(&app, "POST", &ev, Some(serde_json::json!({"retract": ["spoofed(ip1)"]}))).await;
        assert_eq!(v["revision"], 3);
        let (_, after) = call(&app, "GET", &q, None).await;
        assert_eq!(after["verdicts"], before["verdicts"]);
        assert_eq!(after["revision"], 3);
    }

    #[tokio::test]
    async fn priorities_and_conflicts() {
        let app = app();
        let id = session(&app, "ehealth-nopriorities").await;
        let (_, v) = call(&app, "GET", &format!("/sessions/{id}/conflicts"), None).await;
        assert_eq!(v["unresolved"], 7);
        let p = format!("/sessions/{id}/priorities");
        let (code, v) = call(&app, "POST", &p, Some(serde_json::json!({"label": "x", "higher": "nope", "lower": "eh.r3"}))).await;
        assert_eq!(code, 422);
        assert_eq!(v["code"], "dangling-label");
        let (_, v) = call(&app, "GET", &format!("/sessions/{id}/conflicts"), None).await;
        let mut rev = 0;
        for c in v["conflicts"].as_array().unwrap() {
            let Some(s) = c["suggestion"].as_object() else { continue };
            let (code, r) = call(&app, "POST", &p, Some(serde_json::json!({
                "label": s["label"], "higher": s["higher"], "lower": s["lower"], "when": s["when"],
            }))).await;
            assert_eq!(code, 200, "{r}");
            rev = r["revision"].as_u64().unwrap();
        }
        assert_eq!(rev, 7);
        let (_, v) = call(&app, "GET", &format!("/sessions/{id}/conflicts"), None).await;
        assert_eq!(v["unresolved"], 0);
        let (_, v) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
        assert_eq!(v["revision"], 7);
    }

    #[tokio::test]
    async fn explain_and_abduce() {
        let app = app();
        let id = session(&app, "attribution-text").await;
        call(&app, "POST", &format!("/sessions/{id}/evidence"), Some(serde_json::json!({
            "assert": ["sourceIP(a,ip1)", "geoloc(ip1,c1)", "spoofed(ip1)"]
        }))).await;
        let (code, v) = call(&app, "GET", &format!("/sessions/{id}/explain?goal=perform(a,c1)"), None).await;
        assert_eq!(code, 200, "{v}");
        assert_eq!(v["status"], "rejected");
        let (code, v) = call(&app, "POST", &format!("/sessions/{id}/abduce"), Some(serde_json::json!({
            "goal": "perform(a,c1)", "tier": "sceptical", "maxSize": 1
        }))).await;
        assert_eq!(code, 200, "{v}");
        assert!(v["answers"].as_array().unwrap().iter().any(|a| a["assume"] == serde_json::json!(["avoid(a,c1)"])));
        let (code, v) = call(&app, "GET", &format!("/sessions/{id}/query?goal=perform(a,"), None).await;
        assert_eq!(code, 400);
        assert!(v["span"].is_object());
    }
}
