//! Consumer request streams: Poisson arrivals per consumer, Zipf popularity
//! over a catalog of named objects.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Zipf};
use thiserror::Error;

use crate::ids::{ConsumerId, RouterId};
use crate::name::{Name, Prefix};
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Error, PartialEq)]
pub enum WorkloadError {
    #[error("zipf alpha must be finite and >= 0, got {0}")]
    BadAlpha(f64),
    #[error("catalog must hold at least one object")]
    EmptyCatalog,
    #[error("request rate must be finite and > 0, got {0}")]
    BadRate(f64),
    #[error("no consumers to drive")]
    NoConsumers,
    #[error("catalog needs at least one prefix")]
    NoPrefixes,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub zipf_alpha: f64,
    pub catalog_size: usize,
    /// Requests per second issued by all consumers of one router together.
    pub per_router_rate: f64,
    pub duration: SimDuration,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if !self.zipf_alpha.is_finite() || self.zipf_alpha < 0.0 {
            return Err(WorkloadError::BadAlpha(self.zipf_alpha));
        }
        if self.catalog_size == 0 {
            return Err(WorkloadError::EmptyCatalog);
        }
        if !self.per_router_rate.is_finite() || self.per_router_rate <= 0.0 {
            return Err(WorkloadError::BadRate(self.per_router_rate));
        }
        Ok(())
    }
}

/// A consumer and the router it is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConsumerSpec {
    pub id: ConsumerId,
    pub router: RouterId,
}

/// `per_router` consumers on every router, numbered router-major.
pub fn consumers_per_router(routers: usize, per_router: u32) -> Vec<ConsumerSpec> {
    (0..routers as u32)
        .flat_map(|r| {
            (0..per_router).map(move |j| ConsumerSpec {
                id: ConsumerId(r * per_router + j),
                router: RouterId(r),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub time: SimTime,
    pub consumer: ConsumerId,
    pub name: Name,
}

/// Objects ordered by popularity rank. Object `k` (0-based) lives under
/// prefix `k mod P` and is named `<prefix>/o<k>`.
#[derive(Clone, Debug)]
pub struct Catalog {
    names: Vec<Name>,
}

impl Catalog {
    pub fn new(prefixes: &[Prefix], size: usize) -> Result<Self, WorkloadError> {
        if prefixes.is_empty() {
            return Err(WorkloadError::NoPrefixes);
        }
        if size == 0 {
            return Err(WorkloadError::EmptyCatalog);
        }
        let names = (0..size)
            .map(|k| {
                Name::under(&prefixes[k % prefixes.len()], &format!("o{k}"))
                    .expect("generated leaf is a valid component")
            })
            .collect();
        Ok(Catalog { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Object by 0-based popularity rank.
    pub fn name(&self, rank: usize) -> &Name {
        &self.names[rank]
    }

    pub fn names(&self) -> &[Name] {
        &self.names
    }
}

struct Source {
    consumer: ConsumerId,
    rng: ChaCha8Rng,
    gaps: Exp<f64>,
}

/// Merged, time-ordered request stream over all consumers. Arrivals fall in
/// `[0, duration)`; equal times are ordered by consumer id.
pub struct WorkloadStream {
    catalog: Catalog,
    popularity: Zipf<f64>,
    sources: Vec<Source>,
    next: BinaryHeap<Reverse<(SimTime, usize)>>,
    end: SimTime,
}

impl WorkloadStream {
    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn gap(source: &mut Source) -> SimDuration {
        SimDuration::from_secs_f64(source.gaps.sample(&mut source.rng))
    }
}

impl Iterator for WorkloadStream {
    type Item = Request;

    fn next(&mut self) -> Option<Request> {
        let Reverse((time, idx)) = self.next.pop()?;
        let source = &mut self.sources[idx];
        let rank = self.popularity.sample(&mut source.rng) as usize - 1;
        let request = Request {
            time,
            consumer: source.consumer,
            name: self.catalog.name(rank.min(self.catalog.len() - 1)).clone(),
        };
        let following = time + Self::gap(source);
        if following < self.end {
            self.next.push(Reverse((following, idx)));
        }
        Some(request)
    }
}

/// Builds the request stream. Each consumer gets an independent RNG stream
/// derived from `spec.seed` and its id, so adding consumers never perturbs
/// the others.
pub fn generate_workload(
    spec: &WorkloadSpec,
    consumers: &[ConsumerSpec],
    catalog: Catalog,
) -> Result<WorkloadStream, WorkloadError> {
    spec.validate()?;
    if consumers.is_empty() {
        return Err(WorkloadError::NoConsumers);
    }
    let popularity = Zipf::new(catalog.len() as f64, spec.zipf_alpha)
        .map_err(|_| WorkloadError::BadAlpha(spec.zipf_alpha))?;

    let mut per_router = std::collections::BTreeMap::<RouterId, usize>::new();
    for c in consumers {
        *per_router.entry(c.router).or_default() += 1;
    }

    let end = SimTime::ZERO + spec.duration;
    let mut sources = Vec::with_capacity(consumers.len());
    let mut next = BinaryHeap::new();
    for (idx, c) in consumers.iter().enumerate() {
        let rate = spec.per_router_rate / per_router[&c.router] as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(u64::from(c.id.0) + 1);
        let mut source =
            Source { consumer: c.id, rng, gaps: Exp::new(rate).expect("rate validated") };
        let first = SimTime::ZERO + WorkloadStream::gap(&mut source);
        if first < end {
            next.push(Reverse((first, idx)));
        }
        sources.push(source);
    }
    Ok(WorkloadStream { catalog, popularity, sources, next, end })
}

/// Uniform 64-bit nonces for NDN Interests, reproducible from a seed.
pub struct NonceSource(ChaCha8Rng);

impl NonceSource {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        NonceSource(rng)
    }

    pub fn draw(&mut self) -> u64 {
        self.0.random()
    }
}
