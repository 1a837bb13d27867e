use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HoareError;
use crate::lang::{Arg, Param, Sort, Value};

pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Source of one parameter's values across generated samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Sample `i` takes element `i mod len`.
    List(Vec<Arg>),
    /// `points` equispaced values from `lo` to `hi` inclusive, cycled.
    Grid { lo: f64, hi: f64, points: usize },
    /// Uniform on `[lo, hi)`; vectors draw each component independently.
    Uniform { lo: f64, hi: f64 },
    /// Uniform on `lo..=hi`.
    UniformNat { lo: u64, hi: u64 },
    /// `lo + k·2^-bits` for uniform `k` with the value at most `hi`. Exact
    /// whenever `lo` is a multiple of `2^-bits` of moderate size.
    Dyadic { lo: f64, hi: f64, bits: u32 },
}

impl Generator {
    fn validate(&self, param: &Param) -> Result<(), String> {
        let name = &param.name;
        let ok = match (self, param.sort) {
            (Generator::List(xs), _) => !xs.is_empty(),
            (Generator::Grid { lo, hi, points }, Sort::Real) => *points >= 1 && lo <= hi,
            (Generator::Uniform { lo, hi }, Sort::Real | Sort::Vec(_)) => lo < hi,
            (Generator::UniformNat { lo, hi }, Sort::Nat) => lo <= hi,
            (Generator::Dyadic { lo, hi, bits }, Sort::Real | Sort::Vec(_)) => {
                lo <= hi && *bits <= 52
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(format!(
                "generator {self:?} does not fit parameter `{name}` of sort {}",
                param.sort
            ))
        }
    }

    fn draw(&self, i: usize, sort: Sort, rng: &mut ChaCha8Rng) -> Arg {
        let real = |rng: &mut ChaCha8Rng| match *self {
            Generator::Uniform { lo, hi } => rng.gen_range(lo..hi),
            Generator::Dyadic { lo, hi, bits } => {
                let scale = 2f64.powi(bits as i32);
                let kmax = ((hi - lo) * scale).floor() as u64;
                lo + rng.gen_range(0..=kmax) as f64 / scale
            }
            _ => unreachable!("only random real generators reach here"),
        };
        match self {
            Generator::List(xs) => xs[i % xs.len()].clone(),
            Generator::Grid { lo, hi, points } => {
                let j = i % points;
                let x = if *points == 1 {
                    *lo
                } else {
                    lo + (hi - lo) * j as f64 / (*points - 1) as f64
                };
                Arg::Value(Value::Real(x))
            }
            Generator::UniformNat { lo, hi } => Arg::Value(Value::Nat(rng.gen_range(*lo..=*hi))),
            Generator::Uniform { .. } | Generator::Dyadic { .. } => match sort {
                Sort::Vec(n) => Arg::Value(Value::Vec((0..n).map(|_| real(rng)).collect())),
                _ => Arg::Value(Value::Real(real(rng))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSource {
    /// An explicitly listed instance.
    Instance,
    Generated,
}

/// One argument tuple, by parameter name.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub source: SampleSource,
    pub args: Vec<(String, Arg)>,
}

/// Explicit instances followed by `samples` generated tuples.
///
/// Generated sample `i` draws, in parameter order, from one ChaCha8 stream
/// seeded with `seed`, so a plan with more samples extends a smaller one.
/// Parameters without a generator take their value from the first instance.
/// Nothing is generated when no parameter has a generator, unless the
/// program has no parameters at all.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub instances: Vec<Vec<(String, Arg)>>,
    pub generators: Vec<(String, Generator)>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> SamplePlan {
        SamplePlan {
            instances: Vec::new(),
            generators: Vec::new(),
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

impl SamplePlan {
    /// A plan holding only the given instances.
    pub fn instances(instances: Vec<Vec<(String, Arg)>>) -> SamplePlan {
        SamplePlan {
            instances,
            samples: 0,
            ..SamplePlan::default()
        }
    }

    pub fn with_generator(mut self, param: &str, g: Generator) -> SamplePlan {
        self.generators.retain(|(n, _)| n != param);
        self.generators.push((param.to_string(), g));
        self
    }

    /// The full sample sequence for a program with parameters `params`.
    pub fn samples_for(&self, params: &[Param]) -> Result<Vec<Sample>, HoareError> {
        for (name, g) in &self.generators {
            let p = params
                .iter()
                .find(|p| &p.name == name)
                .ok_or_else(|| HoareError::Plan(format!("no parameter named `{name}`")))?;
            g.validate(p).map_err(HoareError::Plan)?;
        }
        let mut out: Vec<Sample> = self
            .instances
            .iter()
            .enumerate()
            .map(|(index, args)| Sample {
                index,
                source: SampleSource::Instance,
                args: args.clone(),
            })
            .collect();
        let generate = !self.generators.is_empty() || params.is_empty();
        if generate {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            for i in 0..self.samples {
                let mut args = Vec::with_capacity(params.len());
                for p in params {
                    let arg = match self.generators.iter().find(|(n, _)| *n == p.name) {
                        Some((_, g)) => g.draw(i, p.sort, &mut rng),
                        None => self
                            .instances
                            .first()
                            .and_then(|inst| inst.iter().find(|(n, _)| *n == p.name))
                            .map(|(_, a)| a.clone())
                            .ok_or_else(|| {
                                HoareError::Plan(format!(
                                    "parameter `{}` has neither a generator nor an instance value",
                                    p.name
                                ))
                            })?,
                    };
                    args.push((p.name.clone(), arg));
                }
                out.push(Sample {
                    index: out.len(),
                    source: SampleSource::Generated,
                    args,
                });
            }
        }
        if out.is_empty() {
            return Err(HoareError::EmptyPlan);
        }
        Ok(out)
    }
}
