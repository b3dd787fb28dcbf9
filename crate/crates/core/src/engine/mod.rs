//! Evaluation protocols: task planning, chat sessions, grading and scores.

pub mod adapter;
pub mod grading;
pub mod record;

use std::collections::{BTreeMap, HashMap};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{distance_buckets_where, GenerationError};
use crate::graph::{NodeId, TaskGraph};
use crate::naming::SurrogateLibrary;
use crate::oracle::lexicon::Lexicon;
use crate::oracle::{
    ground_truth_with_assertion, is_askable, GroundTruth, OracleError, Orientation, QuestionForm,
};
use crate::par::{map_bounded, SESSION_WORKERS};
use crate::render::{build_question, chunk_prompts, render_rulebook, RenderError, TemplateSet};
use crate::schema::SchemaRegistry;
use crate::scoring::{
    grade_vector, memory_score, reasoning_score, Grade, Score, ScoringError, MEMORY_STEPS,
};

use adapter::{AdapterError, ChatAdapter};
use grading::{grade_answer, GradeTarget, Protocol, Rubric};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Loaded data every stage needs.
#[derive(Debug, Clone)]
pub struct Resources {
    pub registry: SchemaRegistry,
    pub lexicon: Lexicon,
    pub templates: TemplateSet,
    pub surrogates: SurrogateLibrary,
    pub rubric: Rubric,
}

impl Resources {
    pub fn shipped() -> Resources {
        let registry = SchemaRegistry::shipped();
        Resources::new(
            registry.clone(),
            Lexicon::shipped(),
            TemplateSet::shipped(&registry),
            SurrogateLibrary::shipped(),
        )
    }

    pub fn new(
        registry: SchemaRegistry,
        lexicon: Lexicon,
        templates: TemplateSet,
        surrogates: SurrogateLibrary,
    ) -> Resources {
        let rubric = Rubric::new(&registry, &lexicon);
        Resources {
            registry,
            lexicon,
            templates,
            surrogates,
            rubric,
        }
    }
}

/// One question put to the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    /// `reasoning-d3` or `memory-k2-d1`.
    pub id: String,
    pub protocol: Protocol,
    /// Distance for reasoning tasks, step count for memory tasks.
    pub step: u8,
    pub distance: u8,
    pub form: QuestionForm,
    pub a: NodeId,
    pub b: NodeId,
    pub asserted: Option<String>,
    pub expected_ordinal: Option<u8>,
    /// Canonical designation, for readers of `tasks.txt`.
    pub expected: String,
    pub question: String,
}

impl Task {
    pub fn truth(&self, graph: &TaskGraph, res: &Resources) -> Result<GroundTruth, OracleError> {
        ground_truth_with_assertion(
            graph,
            &res.registry,
            &res.lexicon,
            self.a,
            self.b,
            self.form,
            self.asserted.as_deref(),
        )
    }

    pub fn session_id(&self) -> String {
        match self.protocol {
            Protocol::Reasoning => format!("reasoning-d{}", self.step),
            Protocol::Memory => format!("memory-k{}", self.step),
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}",
            self.id,
            self.protocol.as_str(),
            self.step,
            self.distance,
            self.form.number(),
            self.a,
            self.b,
            self.asserted.as_deref().unwrap_or("-"),
            self.expected_ordinal
                .map_or("-".to_string(), |o| o.to_string()),
            self.expected,
            self.question
        )
    }

    pub fn from_line(line: &str) -> Option<Task> {
        let f: Vec<&str> = line.splitn(11, '|').collect();
        if f.len() != 11 {
            return None;
        }
        let node = |s: &str| s.parse::<u32>().ok().map(NodeId);
        Some(Task {
            id: f[0].to_string(),
            protocol: Protocol::parse(f[1])?,
            step: f[2].parse().ok()?,
            distance: f[3].parse().ok()?,
            form: QuestionForm::from_number(f[4].parse().ok()?)?,
            a: node(f[5])?,
            b: node(f[6])?,
            asserted: (f[7] != "-").then(|| f[7].to_string()),
            expected_ordinal: if f[8] == "-" {
                None
            } else {
                Some(f[8].parse().ok()?)
            },
            expected: f[9].to_string(),
            question: f[10].to_string(),
        })
    }
}

pub fn tasks_to_text(tasks: &[Task]) -> String {
    let mut out =
        String::from("# id|protocol|step|distance|form|a|b|asserted|ordinal|expected|question\n");
    for t in tasks {
        out.push_str(&t.to_line());
        out.push('\n');
    }
    out
}

pub fn tasks_from_text(text: &str) -> Option<Vec<Task>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(Task::from_line)
        .collect()
}

fn pick_form<R: Rng + ?Sized>(rng: &mut R) -> QuestionForm {
    if rng.gen_bool(0.5) {
        QuestionForm::Relationship
    } else {
        QuestionForm::Address
    }
}

/// Ordinal of a single forward ordinal edge, which a memory answer must
/// repeat.
fn single_edge_ordinal(truth: &GroundTruth) -> Option<u8> {
    match truth.chain.atoms.as_slice() {
        [atom] if atom.orientation == Orientation::Forward => atom.ordinal,
        _ => None,
    }
}

/// Where a task sits in the protocols.
struct Slot {
    protocol: Protocol,
    step: u8,
    distance: u8,
    form: QuestionForm,
}

fn make_task(
    graph: &TaskGraph,
    res: &Resources,
    slot: Slot,
    (a, b): (NodeId, NodeId),
) -> Result<Task, EngineError> {
    let Slot {
        protocol,
        step,
        distance,
        form,
    } = slot;
    let id = match protocol {
        Protocol::Reasoning => format!("reasoning-d{distance}"),
        Protocol::Memory => format!("memory-k{step}-d{distance}"),
    };
    let truth = ground_truth_with_assertion(graph, &res.registry, &res.lexicon, a, b, form, None)?;
    let rendered = build_question(&truth, graph)?;
    let expected_ordinal = match protocol {
        Protocol::Memory => single_edge_ordinal(&truth),
        Protocol::Reasoning => None,
    };
    Ok(Task {
        id,
        protocol,
        step,
        distance,
        form,
        a,
        b,
        asserted: None,
        expected_ordinal,
        expected: truth.designation_ab.canonical.clone(),
        question: rendered.question_text,
    })
}

/// Orients a sampled pair at random so either endpoint can be the one
/// asking.
fn orient<R: Rng + ?Sized>((a, b): (NodeId, NodeId), rng: &mut R) -> (NodeId, NodeId) {
    if rng.gen_bool(0.5) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Picks one pair per reasoning distance 2..=5 and one distance-1 and one
/// distance-2 pair for the memory protocol (shared by all step counts).
/// Forms 1 and 2 are drawn uniformly.
pub fn plan_tasks<R: Rng + ?Sized>(
    graph: &TaskGraph,
    res: &Resources,
    rng: &mut R,
) -> Result<Vec<Task>, EngineError> {
    let askable = |a, b| is_askable(graph, &res.registry, &res.lexicon, a, b);
    let reasoning = distance_buckets_where(graph, 2..=5, rng, askable)?;
    let memory = distance_buckets_where(graph, 1..=2, rng, askable)?;
    let mut tasks = Vec::new();
    for (&d, &pair) in &reasoning {
        let d = d as u8;
        let pair = orient(pair, rng);
        let form = pick_form(rng);
        let slot = Slot {
            protocol: Protocol::Reasoning,
            step: d,
            distance: d,
            form,
        };
        tasks.push(make_task(graph, res, slot, pair)?);
    }
    let mut memory_pairs = Vec::new();
    for (&d, &pair) in &memory {
        memory_pairs.push((d as u8, orient(pair, rng), pick_form(rng)));
    }
    for k in MEMORY_STEPS {
        if usize::from(k) > graph.edges.len() {
            continue;
        }
        for &(d, pair, form) in &memory_pairs {
            let slot = Slot {
                protocol: Protocol::Memory,
                step: k,
                distance: d,
                form,
            };
            tasks.push(make_task(graph, res, slot, pair)?);
        }
    }
    Ok(tasks)
}

/// A message to send; questions carry their task id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub text: String,
    pub task: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionPlan {
    pub id: String,
    pub messages: Vec<Outgoing>,
}

fn statement(text: String) -> Outgoing {
    Outgoing { text, task: None }
}

fn question(t: &Task) -> Outgoing {
    Outgoing {
        text: t.question.clone(),
        task: Some(t.id.clone()),
    }
}

/// One session per reasoning distance: rulebook, all edge prompts, then the
/// question (with the prompts repeated first when `reinform` is set).
pub fn reasoning_sessions(
    tasks: &[Task],
    rulebook: &[String],
    prompts: &[String],
    reinform: bool,
) -> Vec<SessionPlan> {
    tasks
        .iter()
        .filter(|t| t.protocol == Protocol::Reasoning)
        .map(|t| {
            let mut messages = vec![
                statement(rulebook.join("\n")),
                statement(prompts.join("\n")),
            ];
            if reinform {
                messages.push(statement(prompts.join("\n")));
            }
            messages.push(question(t));
            SessionPlan {
                id: t.session_id(),
                messages,
            }
        })
        .collect()
}

/// One session per step count `k`: rulebook, the prompts in `k` messages,
/// then the distance-1 and distance-2 questions.
pub fn memory_sessions(
    tasks: &[Task],
    rulebook: &[String],
    prompts: &[String],
) -> Result<Vec<SessionPlan>, RenderError> {
    let mut by_step: BTreeMap<u8, Vec<&Task>> = BTreeMap::new();
    for t in tasks.iter().filter(|t| t.protocol == Protocol::Memory) {
        by_step.entry(t.step).or_default().push(t);
    }
    let mut out = Vec::new();
    for (k, mut qs) in by_step {
        qs.sort_by_key(|t| t.distance);
        let mut messages = vec![statement(rulebook.join("\n"))];
        for group in chunk_prompts(prompts, usize::from(k))? {
            messages.push(statement(group.join("\n")));
        }
        messages.extend(qs.into_iter().map(question));
        out.push(SessionPlan {
            id: format!("memory-k{k}"),
            messages,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
    /// Adapter failure in place of a reply.
    Error,
}

/// One transcript record. Questions, and the replies or failures that
/// answer them, carry the task id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub session: String,
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub id: String,
    pub exchanges: Vec<Exchange>,
    /// Unix milliseconds per exchange.
    pub timestamps: Vec<u128>,
}

impl SessionOutcome {
    pub fn failed(&self) -> bool {
        self.exchanges.iter().any(|e| e.role == Role::Error)
    }
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Runs one session to completion. A failed send ends the session; every
/// question not yet answered records the failure.
pub fn run_session(plan: &SessionPlan, adapter: &dyn ChatAdapter) -> SessionOutcome {
    let mut out = SessionOutcome {
        id: plan.id.clone(),
        exchanges: Vec::new(),
        timestamps: Vec::new(),
    };
    let push = |out: &mut SessionOutcome, role: Role, text: String, task: Option<String>| {
        out.exchanges.push(Exchange {
            session: plan.id.clone(),
            role,
            text,
            task,
        });
        out.timestamps.push(now_ms());
    };
    let mut failure: Option<AdapterError> = None;
    let mut session = match adapter.open_session(&plan.id) {
        Ok(s) => Some(s),
        Err(e) => {
            failure = Some(e);
            None
        }
    };
    for m in &plan.messages {
        if let (Some(e), Some(t)) = (&failure, &m.task) {
            push(&mut out, Role::Error, e.to_string(), Some(t.clone()));
            continue;
        }
        let Some(s) = session.as_mut().filter(|_| failure.is_none()) else {
            continue;
        };
        push(&mut out, Role::User, m.text.clone(), m.task.clone());
        match s.send(&m.text) {
            Ok(reply) => push(&mut out, Role::Assistant, reply, m.task.clone()),
            Err(e) => {
                push(&mut out, Role::Error, e.to_string(), m.task.clone());
                failure = Some(e);
            }
        }
    }
    out
}

/// Reply text or failure message per task id.
pub fn replies_from_transcript(transcript: &[Exchange]) -> HashMap<String, Result<String, String>> {
    transcript
        .iter()
        .filter_map(|e| {
            let task = e.task.clone()?;
            match e.role {
                Role::Assistant => Some((task, Ok(e.text.clone()))),
                Role::Error => Some((task, Err(e.text.clone()))),
                Role::User => None,
            }
        })
        .collect()
}

/// Runs sessions on the bounded worker pool; outcomes keep plan order.
pub fn run_sessions(plans: &[SessionPlan], adapter: &dyn ChatAdapter) -> Vec<SessionOutcome> {
    map_bounded(plans, SESSION_WORKERS, |p| run_session(p, adapter))
}

/// Everything a protocol run needs from the generated side.
#[derive(Debug, Clone)]
pub struct RunInputs<'a> {
    pub graph: &'a TaskGraph,
    pub rulebook: &'a [String],
    pub prompts: &'a [String],
    pub tasks: &'a [Task],
}

pub fn run_reasoning_protocol(
    inputs: &RunInputs<'_>,
    adapter: &dyn ChatAdapter,
    reinform: bool,
) -> Vec<SessionOutcome> {
    run_sessions(
        &reasoning_sessions(inputs.tasks, inputs.rulebook, inputs.prompts, reinform),
        adapter,
    )
}

pub fn run_memory_protocol(
    inputs: &RunInputs<'_>,
    adapter: &dyn ChatAdapter,
) -> Result<Vec<SessionOutcome>, RenderError> {
    Ok(run_sessions(
        &memory_sessions(inputs.tasks, inputs.rulebook, inputs.prompts)?,
        adapter,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradeSource {
    Auto,
    Override,
}

impl GradeSource {
    pub fn as_str(self) -> &'static str {
        match self {
            GradeSource::Auto => "auto",
            GradeSource::Override => "override",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradeEntry {
    pub task: String,
    pub grade: Grade,
    pub source: GradeSource,
    pub rationale: String,
}

/// Grades every task. `replies` maps task id to the stored reply or the
/// adapter failure; `overrides` maps task id to a manual grade.
pub fn grade_tasks(
    graph: &TaskGraph,
    res: &Resources,
    tasks: &[Task],
    replies: &HashMap<String, Result<String, String>>,
    overrides: &BTreeMap<String, Grade>,
) -> Result<Vec<GradeEntry>, EngineError> {
    let mut out = Vec::with_capacity(tasks.len());
    for t in tasks {
        if let Some(&g) = overrides.get(&t.id) {
            out.push(GradeEntry {
                task: t.id.clone(),
                grade: g,
                source: GradeSource::Override,
                rationale: "manual grade".into(),
            });
            continue;
        }
        let (grade, rationale) = match replies.get(&t.id) {
            None => (Grade::Zero, "not asked".to_string()),
            Some(Err(e)) => (Grade::Zero, format!("adapter failure: {e}")),
            Some(Ok(reply)) => {
                let truth = t.truth(graph, res)?;
                let target = GradeTarget {
                    truth: &truth,
                    protocol: t.protocol,
                    expected_ordinal: t.expected_ordinal,
                };
                grade_answer(reply, &target, &res.rubric)
            }
        };
        out.push(GradeEntry {
            task: t.id.clone(),
            grade,
            source: GradeSource::Auto,
            rationale: rationale.replace(['\n', '|'], " "),
        });
    }
    Ok(out)
}

/// Reasoning and memory scores from a full set of grades. Memory steps
/// with no task (graphs with fewer edges than steps) count as 0.
pub fn scores_from_grades(
    tasks: &[Task],
    grades: &[GradeEntry],
) -> Result<(Score, Score), ScoringError> {
    let grade_of: HashMap<&str, Grade> =
        grades.iter().map(|g| (g.task.as_str(), g.grade)).collect();
    let lookup = |t: &Task| grade_of.get(t.id.as_str()).copied().unwrap_or(Grade::Zero);
    let reasoning = grade_vector(
        tasks
            .iter()
            .filter(|t| t.protocol == Protocol::Reasoning)
            .map(|t| (t.step, lookup(t))),
    );
    let memory = |d: u8| {
        let mut v = grade_vector(MEMORY_STEPS.map(|k| (k, Grade::Zero)));
        for t in tasks
            .iter()
            .filter(|t| t.protocol == Protocol::Memory && t.distance == d)
        {
            v.insert(t.step, lookup(t));
        }
        v
    };
    Ok((
        reasoning_score(&reasoning)?,
        memory_score(&memory(1), &memory(2))?,
    ))
}

/// Question text to reply for the oracle and always-wrong adapters.
pub fn answer_table(
    graph: &TaskGraph,
    res: &Resources,
    tasks: &[Task],
    correct: bool,
) -> Result<HashMap<String, String>, EngineError> {
    let mut table = HashMap::new();
    for t in tasks {
        let truth = t.truth(graph, res)?;
        let reply = if correct {
            grading::reference_reply(&truth, graph, t.expected_ordinal)
        } else {
            grading::wrong_reply(&truth, graph, &res.lexicon, &res.rubric)
        };
        table.insert(t.question.clone(), reply);
    }
    Ok(table)
}

pub fn rulebook(res: &Resources) -> Vec<String> {
    render_rulebook(&res.registry, &res.lexicon)
}
