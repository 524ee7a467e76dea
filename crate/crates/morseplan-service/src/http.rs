//! HTTP API over registered plans and their surface snapshots.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use morseplan::config::EngineConfig;
use morseplan::spectral::SpectralSolver;
use morseplan::surface::build_surface;
use serde::{Deserialize, Serialize};

use crate::api::{self, plan_id, render_json, PlanData, Snapshot};
use crate::archive::SurfaceArchive;
use crate::error::ServiceError;

/// Environment variable holding the listen address.
pub const ADDR_ENV: &str = "MORSEPLAN_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8787";

pub struct PlanEntry {
    pub config: EngineConfig,
    solver: SpectralSolver,
    snapshot: RwLock<Option<Arc<Snapshot>>>,
}

impl PlanEntry {
    fn snapshot(&self) -> Result<Arc<Snapshot>, ServiceError> {
        self.snapshot
            .read()
            .unwrap()
            .clone()
            .ok_or_else(|| ServiceError::Conflict("surface not yet built for this plan".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobData {
    pub job_id: String,
    pub plan_id: String,
    pub state: JobState,
    pub error: Option<String>,
}

#[derive(Default)]
pub struct AppState {
    plans: RwLock<HashMap<String, Arc<PlanEntry>>>,
    jobs: RwLock<HashMap<String, JobData>>,
    counter: AtomicU64,
}

impl AppState {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn ticket(&self) -> String {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0);
        format!("{t:x}-{:x}", self.counter.fetch_add(1, Ordering::Relaxed))
    }

    /// Registers a plan; registering the same config twice returns the same id.
    pub fn register(&self, config: EngineConfig) -> Result<PlanData, ServiceError> {
        config.validate()?;
        let id = plan_id(&config);
        let mut plans = self.plans.write().unwrap();
        let entry = match plans.get(&id) {
            Some(e) => e.clone(),
            None => {
                let e = Arc::new(PlanEntry {
                    solver: config.spectral_solver()?,
                    config,
                    snapshot: RwLock::new(None),
                });
                plans.insert(id.clone(), e.clone());
                e
            }
        };
        Ok(plan_data(&id, &entry))
    }

    /// Registers the archive's plan with the archive as its surface.
    pub fn load_archive(&self, archive: SurfaceArchive) -> Result<PlanData, ServiceError> {
        let config = archive.header.config.clone();
        if config.hash() != archive.header.config_hash {
            return Err(ServiceError::BadArchive("config hash mismatch".into()));
        }
        let snap = Snapshot::new(archive)?;
        let data = self.register(config)?;
        let entry = self.plan(&data.plan_id)?;
        *entry.snapshot.write().unwrap() = Some(snap);
        Ok(plan_data(&data.plan_id, &entry))
    }

    pub fn plan(&self, id: &str) -> Result<Arc<PlanEntry>, ServiceError> {
        self.plans
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("plan {id}")))
    }

    fn set_job(&self, job: JobData) {
        self.jobs.write().unwrap().insert(job.job_id.clone(), job);
    }
}

fn plan_data(id: &str, entry: &PlanEntry) -> PlanData {
    PlanData {
        plan_id: id.to_string(),
        config_hash: entry.config.hash(),
        surface_built: entry.snapshot.read().unwrap().is_some(),
    }
}

/// Builds the plan's surface and swaps the new snapshot in.
pub fn build_snapshot(entry: &PlanEntry) -> Result<(), ServiceError> {
    let grid = entry.config.grid()?;
    let surface = build_surface(&entry.solver, &grid)?;
    let snap = Snapshot::new(SurfaceArchive::new(&entry.config, surface)?)?;
    *entry.snapshot.write().unwrap() = Some(snap);
    Ok(())
}

struct ApiError(ServiceError, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = serde_json::to_string_pretty(&self.0.body(&self.1)).expect("error serializes");
        (status, [(header::CONTENT_TYPE, "application/json")], body + "\n").into_response()
    }
}

type Reply = Result<Response, ApiError>;

fn json<T: Serialize>(status: StatusCode, data: &T) -> Reply {
    Ok((status, [(header::CONTENT_TYPE, "application/json")], render_json(data)).into_response())
}

fn fail(state: &AppState, e: ServiceError) -> ApiError {
    ApiError(e, state.ticket())
}

fn param(q: &HashMap<String, String>, key: &str) -> Result<f64, ServiceError> {
    let v = q.get(key).ok_or_else(|| ServiceError::Invalid(format!("missing query parameter {key}")))?;
    v.trim()
        .parse()
        .map_err(|_| ServiceError::Invalid(format!("query parameter {key} is not a number: {v}")))
}

/// Comma-separated list of probabilities.
pub fn parse_levels(text: &str) -> Result<Vec<f64>, ServiceError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ServiceError::Invalid(format!("level is not a number: {s}")))
        })
        .collect()
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
}

async fn healthz() -> Reply {
    json(StatusCode::OK, &Health { status: "ok" })
}

async fn create_plan(State(st): State<Arc<AppState>>, body: Bytes) -> Reply {
    let text = std::str::from_utf8(&body).map_err(|_| fail(&st, ServiceError::Invalid("body is not UTF-8".into())))?;
    let cfg = EngineConfig::from_json(text).map_err(|e| fail(&st, e.into()))?;
    let data = st.register(cfg).map_err(|e| fail(&st, e))?;
    json(StatusCode::CREATED, &data)
}

async fn get_plan(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Reply {
    let entry = st.plan(&id).map_err(|e| fail(&st, e))?;
    json(StatusCode::OK, &plan_data(&id, &entry))
}

async fn start_build(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Reply {
    let entry = st.plan(&id).map_err(|e| fail(&st, e))?;
    let job = JobData {
        job_id: st.ticket(),
        plan_id: id,
        state: JobState::Running,
        error: None,
    };
    st.set_job(job.clone());
    let (st2, mut done) = (st.clone(), job.clone());
    tokio::task::spawn_blocking(move || {
        match build_snapshot(&entry) {
            Ok(()) => done.state = JobState::Done,
            Err(e) => {
                done.state = JobState::Failed;
                done.error = Some(e.to_string());
            }
        }
        st2.set_job(done);
    });
    json(StatusCode::ACCEPTED, &job)
}

async fn get_job(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Reply {
    let job = st.jobs.read().unwrap().get(&id).cloned();
    match job {
        Some(j) => json(StatusCode::OK, &j),
        None => Err(fail(&st, ServiceError::NotFound(format!("job {id}")))),
    }
}

async fn get_surface(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> Reply {
    let snap = st.plan(&id).and_then(|e| e.snapshot()).map_err(|e| fail(&st, e))?;
    json(StatusCode::OK, &api::surface(&snap))
}

async fn get_frontiers(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Reply {
    let run = || {
        let snap = st.plan(&id)?.snapshot()?;
        let levels = q.get("levels").map(|s| parse_levels(s)).transpose()?;
        api::frontiers(&snap, levels.as_deref())
    };
    let data = run().map_err(|e| fail(&st, e))?;
    json(StatusCode::OK, &data)
}

async fn get_probability(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Reply {
    let run = || {
        let entry = st.plan(&id)?;
        api::probability(&entry.solver, param(&q, "u0")?, param(&q, "xi")?)
    };
    let data = run().map_err(|e| fail(&st, e))?;
    json(StatusCode::OK, &data)
}

async fn get_solve(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Reply {
    let run = || {
        let snap = st.plan(&id)?.snapshot()?;
        api::solve(&snap, param(&q, "xi")?, param(&q, "alpha")?)
    };
    let data = run().map_err(|e| fail(&st, e))?;
    json(StatusCode::OK, &data)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/plans", post(create_plan))
        .route("/plans/{id}", get(get_plan))
        .route("/plans/{id}/surface", post(start_build).get(get_surface))
        .route("/plans/{id}/frontiers", get(get_frontiers))
        .route("/plans/{id}/probability", get(get_probability))
        .route("/plans/{id}/solve", get(get_solve))
        .route("/jobs/{id}", get(get_job))
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, addr: &str) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
