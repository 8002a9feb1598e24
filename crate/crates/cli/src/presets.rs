//! Bundled experiment setups. Each preset expands to one or more jobs with a
//! generated initial mesh, constraints and descent settings.
//!
//! | preset | jobs | mesh | constraints |
//! |---|---|---|---|
//! | `sphere-sanity` | 1 | noisy unit icosphere | barycenter, area, volume kept at their initial values |
//! | `canham` | 2 | prolate and biconcave seeds | area 7.24, volume 1.00, barycenter at the origin |
//! | `cylinder-dirichlet-minimal` | 1 | open cylinder, radius 2.5, height 2.5 | fixed boundary |
//! | `cylinder-dirichlet-nonminimal` | 1 | open cylinder, radius 1.0, height 6.0 | fixed boundary |
//! | `handlebody-commutation` | 2 | genus-one body after `level` and `level + 1` Loop subdivisions | barycenter, area |

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use willmore_core::constraints::{ConstraintKind, ConstraintSpec};
use willmore_core::descent::DescentConfig;
use willmore_core::mesh::{loop_subdivide, MeshError, TriMesh};
use willmore_core::shapes::{biconcave_seed, cylinder_auto, handlebody, icosphere, prolate_seed};

use crate::CliError;

pub const CANHAM_AREA: f64 = 7.24;
pub const CANHAM_VOLUME: f64 = 1.00;
/// Relative per-iteration energy decrease below which a `canham` run counts
/// as settled.
pub const CANHAM_PLATEAU: f64 = 5e-5;
/// Coordinate noise amplitude of the `sphere-sanity` mesh.
pub const SPHERE_NOISE: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    SphereSanity,
    Canham,
    CylinderDirichletMinimal,
    CylinderDirichletNonminimal,
    HandlebodyCommutation,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::SphereSanity,
        Preset::Canham,
        Preset::CylinderDirichletMinimal,
        Preset::CylinderDirichletNonminimal,
        Preset::HandlebodyCommutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SphereSanity => "sphere-sanity",
            Preset::Canham => "canham",
            Preset::CylinderDirichletMinimal => "cylinder-dirichlet-minimal",
            Preset::CylinderDirichletNonminimal => "cylinder-dirichlet-nonminimal",
            Preset::HandlebodyCommutation => "handlebody-commutation",
        }
    }

    pub fn default_level(self) -> usize {
        match self {
            Preset::SphereSanity => 4,
            Preset::Canham => 4,
            Preset::CylinderDirichletMinimal => 3,
            Preset::CylinderDirichletNonminimal => 2,
            Preset::HandlebodyCommutation => 1,
        }
    }

    /// Expands to jobs at the given resolution level.
    pub fn jobs(self, level: Option<usize>) -> Result<Vec<Job>, CliError> {
        let level = level.unwrap_or(self.default_level());
        let descent = |max_iters| DescentConfig {
            max_iters,
            ..DescentConfig::default()
        };
        use ConstraintKind::{Area, Barycenter, Volume};
        let jobs = match self {
            Preset::SphereSanity => {
                let specs = [Barycenter, Area, Volume].map(ConstraintSpec::keep).to_vec();
                vec![Job {
                    name: "sphere".into(),
                    mesh: jitter(&icosphere(level), SPHERE_NOISE, 1)?,
                    constraints: specs,
                    dirichlet: false,
                    descent: descent(200),
                }]
            }
            Preset::Canham => {
                let specs = vec![
                    ConstraintSpec::with_target(Barycenter, vec![0.0; 3]),
                    ConstraintSpec::with_target(Area, vec![CANHAM_AREA]),
                    ConstraintSpec::with_target(Volume, vec![CANHAM_VOLUME]),
                ];
                [
                    ("prolate", prolate_seed(level, CANHAM_AREA, CANHAM_VOLUME)),
                    ("biconcave", biconcave_seed(level, CANHAM_AREA, CANHAM_VOLUME)),
                ]
                .into_iter()
                .map(|(name, mesh)| Job {
                    name: name.into(),
                    mesh,
                    constraints: specs.clone(),
                    dirichlet: false,
                    descent: DescentConfig {
                        stall_rel_decrease: CANHAM_PLATEAU,
                        ..descent(400)
                    },
                })
                .collect()
            }
            Preset::CylinderDirichletMinimal | Preset::CylinderDirichletNonminimal => {
                let (r, h) = if self == Preset::CylinderDirichletMinimal {
                    (2.5, 2.5)
                } else {
                    (1.0, 6.0)
                };
                vec![Job {
                    name: "cylinder".into(),
                    mesh: cylinder_auto(r, h, 12 << level),
                    constraints: Vec::new(),
                    dirichlet: true,
                    descent: descent(300),
                }]
            }
            Preset::HandlebodyCommutation => {
                let mut mesh = handlebody(24, 12);
                for _ in 0..level {
                    mesh = loop_subdivide(&mesh)?;
                }
                let finer = loop_subdivide(&mesh)?;
                let specs = vec![ConstraintSpec::keep(Barycenter), ConstraintSpec::keep(Area)];
                vec![(level, mesh), (level + 1, finer)]
                    .into_iter()
                    .map(|(l, mesh)| Job {
                        name: format!("subd-{l}"),
                        mesh,
                        constraints: specs.clone(),
                        dirichlet: false,
                        descent: DescentConfig {
                            grad_tol: Some(1e-12),
                            ..descent(60)
                        },
                    })
                    .collect()
            }
        };
        Ok(jobs)
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            CliError::Config(format!("unknown preset `{s}` (known: {})", names.join(", ")))
        })
    }
}

/// One descent run.
#[derive(Clone, Debug)]
pub struct Job {
    pub name: String,
    pub mesh: TriMesh,
    pub constraints: Vec<ConstraintSpec>,
    pub dirichlet: bool,
    pub descent: DescentConfig,
}

/// Seeded uniform noise of amplitude `amp` on every coordinate.
pub fn jitter(mesh: &TriMesh, amp: f64, seed: u64) -> Result<TriMesh, MeshError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = mesh.coords();
    for c in f.iter_mut() {
        *c += amp * rng.random_range(-1.0..=1.0);
    }
    mesh.with_coords(&f)
}
