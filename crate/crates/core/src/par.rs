//! Data-parallel helpers. With the `parallel` feature work is spread over a
//! rayon pool; without it every helper runs sequentially. Both paths return
//! results in input order.

use crate::generator::{generate_task_graph, GenerationError};
use crate::graph::{TaskGraph, Violation};
use crate::schema::SchemaRegistry;

/// Worker count for concurrent chat sessions.
pub const SESSION_WORKERS: usize = 4;

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Order-preserving map on the default path.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// Order-preserving map on at most `workers` threads.
pub fn map_bounded<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => map_sequential(items, f),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        map_sequential(items, f)
    }
}

pub type GenerationRequest = (usize, u64);

pub fn generate_batch_sequential(
    registry: &SchemaRegistry,
    requests: &[GenerationRequest],
) -> Vec<Result<TaskGraph, GenerationError>> {
    map_sequential(requests, |&(n, seed)| {
        generate_task_graph(registry, n, seed)
    })
}

#[cfg(feature = "parallel")]
pub fn generate_batch_parallel(
    registry: &SchemaRegistry,
    requests: &[GenerationRequest],
) -> Vec<Result<TaskGraph, GenerationError>> {
    map_parallel(requests, |&(n, seed)| {
        generate_task_graph(registry, n, seed)
    })
}

pub fn generate_batch(
    registry: &SchemaRegistry,
    requests: &[GenerationRequest],
) -> Vec<Result<TaskGraph, GenerationError>> {
    map_ordered(requests, |&(n, seed)| {
        generate_task_graph(registry, n, seed)
    })
}

/// Generation outcome tallies for a batch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchAudit {
    pub graphs: usize,
    pub exhausted: usize,
    pub violations: Vec<(GenerationRequest, Violation)>,
}

/// Generates and audits every request. Graphs abandoned by the generator
/// are counted and their partial graphs audited too.
pub fn audit_batch(registry: &SchemaRegistry, requests: &[GenerationRequest]) -> BatchAudit {
    let per = map_ordered(requests, |&req| {
        let (graph, exhausted) = match generate_task_graph(registry, req.0, req.1) {
            Ok(g) => (Some(g), false),
            Err(GenerationError::GenerationExhausted { partial, .. }) => (Some(*partial), true),
            Err(_) => (None, false),
        };
        let violations = graph.map(|g| g.audit(registry)).unwrap_or_default();
        (req, exhausted, violations)
    });
    let mut out = BatchAudit::default();
    for (req, exhausted, violations) in per {
        out.graphs += 1;
        out.exhausted += usize::from(exhausted);
        out.violations
            .extend(violations.into_iter().map(|v| (req, v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_path_matches_sequential() {
        let reg = SchemaRegistry::shipped();
        let reqs: Vec<GenerationRequest> = (0..40).map(|s| (1 + (s as usize % 10), s)).collect();
        assert_eq!(
            generate_batch(&reg, &reqs),
            generate_batch_sequential(&reg, &reqs)
        );
    }

    #[test]
    fn bounded_map_keeps_order() {
        let items: Vec<u32> = (0..100).collect();
        assert_eq!(
            map_bounded(&items, 4, |x| x * 2),
            (0..100).map(|x| x * 2).collect::<Vec<_>>()
        );
    }

    #[test]
    fn small_audit_is_clean() {
        let reg = SchemaRegistry::shipped();
        let reqs: Vec<GenerationRequest> = (0..200).map(|s| (1 + (s as usize % 10), s)).collect();
        let audit = audit_batch(&reg, &reqs);
        assert_eq!(audit.graphs, 200);
        assert!(audit.violations.is_empty(), "{:?}", audit.violations);
    }
}
