//! The ε-ball cover.
//!
//! Landmarks are picked one at a time from the points no ball has covered
//! yet; each gets the closed ball of radius `eps` around it, and the loop
//! stops when nothing is left uncovered. Two consequences hold for every
//! cover built here and are checked by [`assert_cover_valid`]:
//!
//! * completeness: every point is in some ball;
//! * packing: landmarks are pairwise more than `eps` apart, because each
//!   one was uncovered when it was chosen.
//!
//! The cover works on raw coordinates. Standardize the cloud first if its
//! columns are on different scales.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PointCloud;
use crate::neighbors::{build_index, BruteForce, RadiusSearch};
use crate::rng;

/// How the next landmark is picked from the uncovered points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LandmarkPolicy {
    /// Lowest uncovered row index.
    Sequential,
    /// Uniform over the uncovered rows, listed in index order, drawn from
    /// the seeded generator.
    Random,
}

impl fmt::Display for LandmarkPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LandmarkPolicy::Sequential => "sequential",
            LandmarkPolicy::Random => "random",
        })
    }
}

impl std::str::FromStr for LandmarkPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(LandmarkPolicy::Sequential),
            "random" => Ok(LandmarkPolicy::Random),
            other => Err(Error::InvalidConfig(format!(
                "unknown policy `{other}` (expected sequential or random)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverConfig {
    pub eps: f64,
    pub policy: LandmarkPolicy,
    /// Only read by [`LandmarkPolicy::Random`].
    pub seed: u64,
}

impl CoverConfig {
    pub fn sequential(eps: f64) -> Self {
        CoverConfig {
            eps,
            policy: LandmarkPolicy::Sequential,
            seed: 0,
        }
    }

    pub fn random(eps: f64, seed: u64) -> Self {
        CoverConfig {
            eps,
            policy: LandmarkPolicy::Random,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidEps(self.eps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub id: usize,
    pub landmark: usize,
    /// Sorted row positions within `eps` of the landmark.
    pub members: Vec<usize>,
}

impl Ball {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.members.binary_search(&point).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    balls: Vec<Ball>,
    eps: f64,
    n_points: usize,
}

impl Cover {
    /// Assembles a cover from parts without checking it; run
    /// [`assert_cover_valid`] when the parts come from outside.
    pub fn from_parts(balls: Vec<Ball>, eps: f64, n_points: usize) -> Self {
        Cover { balls, eps, n_points }
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn ball(&self, id: usize) -> Option<&Ball> {
        match self.balls.get(id) {
            Some(b) if b.id == id => Some(b),
            _ => self.balls.iter().find(|b| b.id == id),
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.balls.iter().map(Ball::size).collect()
    }

    /// For each point, the ids of the balls containing it, ascending.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_points];
        for b in &self.balls {
            for &p in &b.members {
                out[p].push(b.id);
            }
        }
        out
    }
}

/// Builds the cover with the default neighbor index for the cloud's shape.
pub fn build_cover(cloud: &PointCloud, config: &CoverConfig) -> Result<Cover> {
    config.validate()?;
    let index = build_index(cloud, config.eps);
    build_cover_with(cloud, config, index.as_ref())
}

/// Builds the cover using an explicit neighbor search.
pub fn build_cover_with(
    cloud: &PointCloud,
    config: &CoverConfig,
    search: &(impl RadiusSearch + ?Sized),
) -> Result<Cover> {
    config.validate()?;
    let n = cloud.n();
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    let mut covered = vec![false; n];
    let mut balls = Vec::new();

    match config.policy {
        LandmarkPolicy::Sequential => {
            let mut next = 0;
            while next < n {
                let members = search.within(cloud, next, config.eps);
                for &m in &members {
                    covered[m] = true;
                }
                balls.push(Ball {
                    id: balls.len(),
                    landmark: next,
                    members,
                });
                while next < n && covered[next] {
                    next += 1;
                }
            }
        }
        LandmarkPolicy::Random => {
            let mut rng = rng::seeded(config.seed);
            let mut uncovered: Vec<usize> = (0..n).collect();
            while !uncovered.is_empty() {
                let landmark = uncovered[rng.random_range(0..uncovered.len())];
                let members = search.within(cloud, landmark, config.eps);
                for &m in &members {
                    covered[m] = true;
                }
                balls.push(Ball {
                    id: balls.len(),
                    landmark,
                    members,
                });
                uncovered.retain(|&i| !covered[i]);
            }
        }
    }

    Ok(Cover {
        balls,
        eps: config.eps,
        n_points: n,
    })
}

/// Member list per ball id.
pub fn points_covered_by_landmarks(cover: &Cover) -> BTreeMap<usize, Vec<usize>> {
    cover.balls.iter().map(|b| (b.id, b.members.clone())).collect()
}

/// First property a cover was found to break.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverViolation {
    PointCountMismatch {
        cloud: usize,
        cover: usize,
    },
    LandmarkOutOfRange {
        ball: usize,
        landmark: usize,
    },
    UnsortedMembers {
        ball: usize,
    },
    /// `point` is within `eps` of the landmark but not listed.
    MissingMember {
        ball: usize,
        point: usize,
    },
    /// `point` is listed but farther than `eps` from the landmark.
    ExtraMember {
        ball: usize,
        point: usize,
        distance: f64,
    },
    Uncovered {
        point: usize,
    },
    Packing {
        a: usize,
        b: usize,
        distance: f64,
    },
}

impl fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverViolation::PointCountMismatch { cloud, cover } => {
                write!(f, "cover is over {cover} points but the cloud has {cloud}")
            }
            CoverViolation::LandmarkOutOfRange { ball, landmark } => {
                write!(f, "ball {ball}: landmark {landmark} out of range")
            }
            CoverViolation::UnsortedMembers { ball } => {
                write!(f, "ball {ball}: members not strictly ascending")
            }
            CoverViolation::MissingMember { ball, point } => {
                write!(f, "ball {ball}: point {point} is within eps but missing")
            }
            CoverViolation::ExtraMember { ball, point, distance } => {
                write!(f, "ball {ball}: point {point} is listed at distance {distance}")
            }
            CoverViolation::Uncovered { point } => write!(f, "point {point} is in no ball"),
            CoverViolation::Packing { a, b, distance } => {
                write!(f, "landmarks of balls {a} and {b} are only {distance} apart")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverDiagnostics {
    pub violation: Option<CoverViolation>,
}

impl CoverDiagnostics {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Re-derives completeness, packing and exact closed-ball membership for
/// `cover` by brute-force distance scans.
pub fn assert_cover_valid(cloud: &PointCloud, cover: &Cover) -> CoverDiagnostics {
    CoverDiagnostics {
        violation: find_violation(cloud, cover),
    }
}

fn find_violation(cloud: &PointCloud, cover: &Cover) -> Option<CoverViolation> {
    let n = cloud.n();
    if cover.n_points != n {
        return Some(CoverViolation::PointCountMismatch {
            cloud: n,
            cover: cover.n_points,
        });
    }
    let eps = cover.eps;
    let mut covered = vec![false; n];
    for ball in &cover.balls {
        if ball.landmark >= n {
            return Some(CoverViolation::LandmarkOutOfRange {
                ball: ball.id,
                landmark: ball.landmark,
            });
        }
        if ball.members.windows(2).any(|w| w[0] >= w[1]) {
            return Some(CoverViolation::UnsortedMembers { ball: ball.id });
        }
        let expected = BruteForce.within(cloud, ball.landmark, eps);
        let (mut e, mut g) = (expected.iter().peekable(), ball.members.iter().peekable());
        loop {
            match (e.peek(), g.peek()) {
                (None, None) => break,
                (Some(&&x), Some(&&y)) if x == y => {
                    e.next();
                    g.next();
                }
                (Some(&&x), Some(&&y)) if x < y => {
                    return Some(CoverViolation::MissingMember {
                        ball: ball.id,
                        point: x,
                    })
                }
                (Some(&&x), None) => {
                    return Some(CoverViolation::MissingMember {
                        ball: ball.id,
                        point: x,
                    })
                }
                (_, Some(&&y)) => {
                    return Some(CoverViolation::ExtraMember {
                        ball: ball.id,
                        point: y,
                        distance: if y < n {
                            cloud.distance(y, ball.landmark)
                        } else {
                            f64::NAN
                        },
                    })
                }
            }
        }
        for &m in &ball.members {
            covered[m] = true;
        }
    }
    if let Some(point) = covered.iter().position(|c| !c) {
        return Some(CoverViolation::Uncovered { point });
    }
    for (i, a) in cover.balls.iter().enumerate() {
        for b in &cover.balls[i + 1..] {
            let d = cloud.distance(a.landmark, b.landmark);
            if !(d > eps) {
                return Some(CoverViolation::Packing {
                    a: a.id,
                    b: b.id,
                    distance: d,
                });
            }
        }
    }
    None
}
