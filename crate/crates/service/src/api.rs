//! Routes, request bodies and response views.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uuid::Uuid;
use waso_core::io::{parse_graph, LoadOptions};
use waso_core::solver::SolverConfig;
use waso_core::synth::SynthSpec;
use waso_core::{breakdown, NodeId, SocialGraph, Solution, WeightMode};

use crate::error::{Result, ServiceError};
use crate::session::{GraphData, RsvpStatus, Session, SessionState};
use crate::store::Store;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/solve", post(solve))
        .route("/sessions/{id}/rsvp", post(rsvp))
        .route("/sessions/{id}/replan", post(replan))
        .route("/sessions/{id}/evaluate", post(evaluate))
        .with_state(store)
}

/// Uploaded graph in the edge-list and score formats of the command line tool.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphUpload {
    pub edges: String,
    #[serde(default)]
    pub scores: Option<String>,
    #[serde(default)]
    pub normalize: bool,
}

/// Exactly one of `graph` and `synthetic`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub graph: Option<GraphUpload>,
    #[serde(default)]
    pub synthetic: Option<SynthSpec>,
    #[serde(default)]
    pub config: SolverConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsvpRequest {
    pub node: NodeId,
    pub status: RsvpStatus,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplanRequest {
    #[serde(default)]
    pub force: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    pub members: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberView {
    pub id: NodeId,
    pub label: String,
    /// Interest term of this member in the objective.
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieView {
    pub a: NodeId,
    pub b: NodeId,
    /// Tightness between the two, both directions.
    pub contribution: f64,
}

/// A group with the terms that make up its willingness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionView {
    pub willingness: f64,
    pub connected: bool,
    pub members: Vec<MemberView>,
    pub ties: Vec<TieView>,
}

impl SolutionView {
    pub fn new(graph: &SocialGraph, solution: &Solution, mode: WeightMode) -> Result<Self> {
        let parts = breakdown(graph, &solution.members, mode)?;
        Ok(SolutionView {
            willingness: solution.willingness,
            connected: solution.connected,
            members: parts
                .members
                .into_iter()
                .map(|m| MemberView { id: m.node, label: graph.label(m.node).to_string(), contribution: m.contribution })
                .collect(),
            ties: parts.pairs.into_iter().map(|p| TieView { a: p.a, b: p.b, contribution: p.contribution }).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: Uuid,
    pub n: usize,
    pub config: SolverConfig,
    pub solution: Option<SolutionView>,
    pub rsvp: BTreeMap<NodeId, RsvpStatus>,
    /// Only in `GET /sessions/{id}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphData>,
}

impl SessionView {
    fn new(s: &Session, with_graph: bool) -> Result<Self> {
        Ok(SessionView {
            id: s.id,
            n: s.graph.n(),
            config: s.config.clone(),
            solution: solution_view(s)?,
            rsvp: s.state.rsvp.clone(),
            graph: with_graph.then(|| GraphData::of(&s.graph)),
        })
    }
}

fn solution_view(s: &Session) -> Result<Option<SolutionView>> {
    s.state.solution.as_ref().map(|sol| SolutionView::new(&s.graph, sol, s.config.mode)).transpose()
}

/// Empty bodies read as `{}`.
fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T> {
    let text: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(text).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

fn session_id(raw: &str) -> Result<Uuid> {
    Uuid::parse_str(raw).map_err(|e| ServiceError::BadRequest(format!("session id `{raw}`: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> Result<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Storage(format!("worker failed: {e}")))?
}

/// Runs a state transition under the session lock and commits it on success.
async fn transition<R: Send + 'static>(
    store: Arc<Store>,
    id: Uuid,
    step: impl FnOnce(&Session) -> Result<SessionState> + Send + 'static,
    render: impl FnOnce(&Session) -> Result<R> + Send + 'static,
) -> Result<R> {
    let mut session = store.get(id)?.lock_owned().await;
    blocking(move || {
        let next = step(&session)?;
        store.commit(&mut session, next)?;
        render(&session)
    })
    .await
}

async fn create_session(State(store): State<Arc<Store>>, body: Bytes) -> Result<(StatusCode, Json<SessionView>)> {
    let req: CreateSession = parse(&body)?;
    let view = blocking(move || {
        let graph = match (req.graph, req.synthetic) {
            (Some(g), None) => parse_graph(&g.edges, g.scores.as_deref(), LoadOptions { normalize: g.normalize })?,
            (None, Some(spec)) => spec.generate()?,
            _ => return Err(ServiceError::BadRequest("give exactly one of `graph` and `synthetic`".into())),
        };
        let session = Session::new(graph, req.config)?;
        let view = SessionView::new(&session, false)?;
        store.insert(session)?;
        Ok(view)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(store): State<Arc<Store>>, Path(id): Path<String>) -> Result<Json<SessionView>> {
    let id = session_id(&id)?;
    let session = store.get(id)?.lock_owned().await;
    Ok(Json(blocking(move || SessionView::new(&session, true)).await?))
}

async fn solve(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> Result<Json<SolutionView>> {
    let id = session_id(&id)?;
    let _: SolveRequest = parse(&body)?;
    let view = transition(store, id, Session::solve, |s| Ok(solution_view(s)?.expect("just solved"))).await?;
    Ok(Json(view))
}

async fn rsvp(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> Result<Json<SessionView>> {
    let id = session_id(&id)?;
    let req: RsvpRequest = parse(&body)?;
    let view = transition(store, id, move |s| s.rsvp(req.node, req.status), |s| SessionView::new(s, false)).await?;
    Ok(Json(view))
}

async fn replan(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> Result<Json<SolutionView>> {
    let id = session_id(&id)?;
    let req: ReplanRequest = parse(&body)?;
    let view =
        transition(store, id, move |s| s.replan(req.force), |s| Ok(solution_view(s)?.expect("replanned"))).await?;
    Ok(Json(view))
}

/// Scores an arbitrary member set, for comparing a hand-picked group with the solver's.
async fn evaluate(State(store): State<Arc<Store>>, Path(id): Path<String>, body: Bytes) -> Result<Json<SolutionView>> {
    let id = session_id(&id)?;
    let req: EvaluateRequest = parse(&body)?;
    let session = store.get(id)?.lock_owned().await;
    let view = blocking(move || {
        let solution = Solution::evaluate(&session.graph, &req.members, session.config.mode)?;
        SolutionView::new(&session.graph, &solution, session.config.mode)
    })
    .await?;
    Ok(Json(view))
}
