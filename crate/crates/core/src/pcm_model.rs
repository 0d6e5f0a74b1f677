//! Physical description of a production-cost (unit commitment) problem.
//!
//! A [`PcmInstance`] holds the power system and its hourly profiles. The
//! bundled PJM 5-bus system comes from `data/pjm5.json`; perturbed training
//! and test families are derived from it with [`generate_instance`].

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub p_max: f64,
    pub p_min: f64,
    /// MW per hour.
    pub ramp_up: f64,
    /// MW per hour.
    pub ramp_down: f64,
    pub t_on: usize,
    pub t_off: usize,
    pub marginal_cost: f64,
    pub bus_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub p_min: f64,
    pub p_max: f64,
    pub from_bus: usize,
    pub to_bus: usize,
    /// Only used by the DC-angle flow model.
    #[serde(default = "default_susceptance")]
    pub susceptance: f64,
}

fn default_susceptance() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FarmKind {
    Wind,
    Solar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewableFarm {
    pub kind: FarmKind,
    pub bus_id: usize,
    pub forecast: Vec<f64>,
    pub curtail_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcmInstance {
    #[serde(rename = "horizon_T")]
    pub horizon_t: usize,
    pub buses: Vec<usize>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    pub farms: Vec<RenewableFarm>,
    /// `load[b][t]`, MW.
    pub load: Vec<Vec<f64>>,
    pub reserve_up: Vec<f64>,
    pub reserve_down: Vec<f64>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct InstanceDocument {
    schema_version: u32,
    #[serde(flatten)]
    instance: PcmInstance,
}

impl PcmInstance {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    /// System load `D_t`, the sum over buses.
    pub fn system_load(&self, t: usize) -> f64 {
        self.load.iter().map(|row| row[t]).sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let t_len = self.horizon_t;
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if t_len == 0 {
            return bad("horizon must be at least one hour".into());
        }
        let nb = self.buses.len();
        for (i, g) in self.generators.iter().enumerate() {
            if !(0.0 <= g.p_min && g.p_min <= g.p_max) {
                return bad(format!("generator {i}: need 0 <= p_min <= p_max"));
            }
            if !(g.ramp_up > 0.0 && g.ramp_down > 0.0) {
                return bad(format!("generator {i}: ramp rates must be positive"));
            }
            if g.t_on < 1 || g.t_off < 1 {
                return bad(format!("generator {i}: minimum on/off times must be >= 1"));
            }
            if g.bus_id >= nb || !g.marginal_cost.is_finite() {
                return bad(format!("generator {i}: bad bus or cost"));
            }
        }
        for (i, l) in self.lines.iter().enumerate() {
            if l.p_min > l.p_max || l.from_bus >= nb || l.to_bus >= nb || l.from_bus == l.to_bus {
                return bad(format!("line {i}: bad limits or endpoints"));
            }
            if !(l.susceptance > 0.0) {
                return bad(format!("line {i}: susceptance must be positive"));
            }
        }
        for (i, f) in self.farms.iter().enumerate() {
            if f.forecast.len() != t_len {
                return bad(format!("farm {i}: forecast length {} != horizon", f.forecast.len()));
            }
            if f.forecast.iter().any(|&v| !(v >= 0.0 && v.is_finite())) || f.bus_id >= nb {
                return bad(format!("farm {i}: negative forecast or bad bus"));
            }
        }
        if self.load.len() != nb || self.load.iter().any(|row| row.len() != t_len) {
            return bad("load matrix must be buses x horizon".into());
        }
        if self.load.iter().flatten().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return bad("load must be non-negative".into());
        }
        if self.reserve_up.len() != t_len || self.reserve_down.len() != t_len {
            return bad("reserve series must have horizon length".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = InstanceDocument {
            schema_version: INSTANCE_SCHEMA_VERSION,
            instance: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(text)?;
        if doc.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::InvalidInstance(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        doc.instance.validate()?;
        Ok(doc.instance)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Multiplies every load and renewable forecast cell by `max(0, 1 + N(0, sigma))`.
///
/// Cells are drawn in a fixed order (load bus-major, then farms) from a
/// ChaCha stream seeded with `seed`, so the result depends only on the inputs.
pub fn generate_instance(base: &PcmInstance, noise_sigma: f64, seed: u64) -> Result<PcmInstance> {
    if !(noise_sigma >= 0.0) {
        return Err(Error::NegativeNoise(noise_sigma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut out = base.clone();
    let mut perturb = |v: &mut f64| {
        let m = (1.0 + normal.sample(&mut rng)).max(0.0);
        *v *= m;
    };
    out.load.iter_mut().flatten().for_each(&mut perturb);
    out.farms
        .iter_mut()
        .flat_map(|f| f.forecast.iter_mut())
        .for_each(&mut perturb);
    Ok(out)
}

#[derive(Deserialize)]
struct Pjm5Data {
    buses: Vec<String>,
    generators: Vec<GenRecord>,
    lines: Vec<LineRecord>,
    load_peak_mw: f64,
    load_bus_shares: std::collections::BTreeMap<String, f64>,
    load_daily: Vec<f64>,
    load_weekly: Vec<f64>,
    reserve_up_frac: f64,
    reserve_down_frac: f64,
    farms: Vec<FarmRecord>,
}

#[derive(Deserialize)]
struct GenRecord {
    bus: String,
    p_max: f64,
    p_min: f64,
    ramp_pct: f64,
    t_on: usize,
    t_off: usize,
    marginal_cost: f64,
}

#[derive(Deserialize)]
struct LineRecord {
    from: String,
    to: String,
    p_min: f64,
    p_max: f64,
    susceptance: f64,
}

#[derive(Deserialize)]
struct FarmRecord {
    kind: FarmKind,
    bus: String,
    capacity_mw: f64,
    curtail_penalty: f64,
    daily: Vec<f64>,
}

const PJM5_DATA: &str = include_str!("../data/pjm5.json");

/// The PJM 5-bus system: five generators, six lines, one wind and one solar farm.
///
/// Ramp rates are the tabulated percentages of `p_max` per hour. Daily
/// load/renewable shapes repeat over the horizon with a weekly load modulation.
pub fn pjm5_base(horizon: usize) -> Result<PcmInstance> {
    if horizon < 2 {
        return Err(Error::InvalidInstance("PJM-5 horizon must be >= 2".into()));
    }
    let data: Pjm5Data = serde_json::from_str(PJM5_DATA)?;
    let bus_index = |name: &str| -> Result<usize> {
        data.buses
            .iter()
            .position(|b| b == name)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown bus {name}")))
    };

    let generators = data
        .generators
        .iter()
        .map(|g| {
            Ok(Generator {
                p_max: g.p_max,
                p_min: g.p_min,
                ramp_up: g.p_max * g.ramp_pct / 100.0,
                ramp_down: g.p_max * g.ramp_pct / 100.0,
                t_on: g.t_on,
                t_off: g.t_off,
                marginal_cost: g.marginal_cost,
                bus_id: bus_index(&g.bus)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lines = data
        .lines
        .iter()
        .map(|l| {
            Ok(Line {
                p_min: l.p_min,
                p_max: l.p_max,
                from_bus: bus_index(&l.from)?,
                to_bus: bus_index(&l.to)?,
                susceptance: l.susceptance,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let system: Vec<f64> = (0..horizon)
        .map(|t| {
            data.load_peak_mw
                * data.load_daily[t % data.load_daily.len()]
                * data.load_weekly[(t / 24) % data.load_weekly.len()]
        })
        .collect();
    let mut load = vec![vec![0.0; horizon]; data.buses.len()];
    for (name, share) in &data.load_bus_shares {
        let b = bus_index(name)?;
        for (t, d) in system.iter().enumerate() {
            load[b][t] = d * share;
        }
    }
    let farms = data
        .farms
        .iter()
        .map(|f| {
            Ok(RenewableFarm {
                kind: f.kind,
                bus_id: bus_index(&f.bus)?,
                forecast: (0..horizon)
                    .map(|t| f.capacity_mw * f.daily[t % f.daily.len()])
                    .collect(),
                curtail_penalty: f.curtail_penalty,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let inst = PcmInstance {
        horizon_t: horizon,
        buses: (0..data.buses.len()).collect(),
        generators,
        lines,
        farms,
        load,
        reserve_up: system.iter().map(|d| d * data.reserve_up_frac).collect(),
        reserve_down: system.iter().map(|d| d * data.reserve_down_frac).collect(),
        seed: 0,
    };
    inst.validate()?;
    Ok(inst)
}

/// Reduced IEEE 118-bus template with 54 generators and 186 branches.
///
/// The topology is synthetic (a ring plus fixed chords) and exists for model
/// sizing; wind sits on bus 26 and solar on bus 55 (1-based numbering).
pub fn ieee118_template(horizon: usize) -> Result<PcmInstance> {
    const N_BUS: usize = 118;
    const N_GEN: usize = 54;
    const N_LINE: usize = 186;
    const TOTAL_CAPACITY: f64 = 9966.2;
    if horizon < 2 {
        return Err(Error::InvalidInstance("118-bus horizon must be >= 2".into()));
    }
    let pattern = [100.0, 150.0, 200.0, 250.0, 300.0, 420.0];
    let raw: Vec<f64> = (0..N_GEN).map(|k| pattern[k % pattern.len()]).collect();
    let scale = TOTAL_CAPACITY / raw.iter().sum::<f64>();
    let generators: Vec<Generator> = raw
        .iter()
        .enumerate()
        .map(|(k, &cap)| {
            let p_max = cap * scale;
            Generator {
                p_max,
                p_min: 0.2 * p_max,
                ramp_up: 0.4 * p_max,
                ramp_down: 0.4 * p_max,
                t_on: 2 + k % 2,
                t_off: 2 + (k / 2) % 2,
                marginal_cost: 10.0 + (k % 7) as f64 * 5.0,
                bus_id: k * N_BUS / N_GEN,
            }
        })
        .collect();
    let mut lines: Vec<Line> = (0..N_BUS)
        .map(|i| Line {
            p_min: -500.0,
            p_max: 500.0,
            from_bus: i,
            to_bus: (i + 1) % N_BUS,
            susceptance: 1.0,
        })
        .collect();
    let mut k = 0;
    while lines.len() < N_LINE {
        let from = (k * 7) % N_BUS;
        let to = (from + 11 + k % 5) % N_BUS;
        lines.push(Line {
            p_min: -300.0,
            p_max: 300.0,
            from_bus: from,
            to_bus: to,
            susceptance: 1.0,
        });
        k += 1;
    }
    let daily = [
        0.62, 0.59, 0.57, 0.56, 0.57, 0.61, 0.68, 0.76, 0.83, 0.87, 0.89, 0.90, 0.89, 0.88,
        0.87, 0.87, 0.89, 0.94, 1.00, 0.98, 0.93, 0.85, 0.75, 0.67,
    ];
    let peak = 0.55 * TOTAL_CAPACITY;
    let load_buses: Vec<usize> = (0..N_BUS).filter(|b| b % 4 != 3).collect();
    let share = 1.0 / load_buses.len() as f64;
    let mut load = vec![vec![0.0; horizon]; N_BUS];
    for &b in &load_buses {
        for t in 0..horizon {
            load[b][t] = peak * daily[t % 24] * share;
        }
    }
    let system: Vec<f64> = (0..horizon).map(|t| peak * daily[t % 24]).collect();
    let farms = vec![
        RenewableFarm {
            kind: FarmKind::Wind,
            bus_id: 25,
            forecast: (0..horizon).map(|t| 300.0 * (0.5 + 0.2 * ((t % 24) as f64 / 24.0))).collect(),
            curtail_penalty: 50.0,
        },
        RenewableFarm {
            kind: FarmKind::Solar,
            bus_id: 54,
            forecast: (0..horizon)
                .map(|t| {
                    let h = (t % 24) as f64;
                    (250.0 * (std::f64::consts::PI * (h - 6.0) / 12.0).sin()).max(0.0)
                })
                .collect(),
            curtail_penalty: 50.0,
        },
    ];
    let inst = PcmInstance {
        horizon_t: horizon,
        buses: (0..N_BUS).collect(),
        generators,
        lines,
        farms,
        load,
        reserve_up: system.iter().map(|d| 0.05 * d).collect(),
        reserve_down: system.iter().map(|d| 0.03 * d).collect(),
        seed: 0,
    };
    inst.validate()?;
    Ok(inst)
}

/// A small random system (`n_gen` units on one or two buses) for exhaustive checks.
pub fn random_small(seed: u64, n_gen: usize, horizon: usize) -> PcmInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bus = if rng.random_bool(0.5) { 2 } else { 1 };
    let generators: Vec<Generator> = (0..n_gen)
        .map(|_| {
            let p_max: f64 = rng.random_range(50.0..150.0);
            Generator {
                p_max,
                p_min: p_max * rng.random_range(0.2..0.6),
                ramp_up: p_max * rng.random_range(0.3..1.0),
                ramp_down: p_max * rng.random_range(0.3..1.0),
                t_on: rng.random_range(1..=2),
                t_off: rng.random_range(1..=2),
                marginal_cost: rng.random_range(10.0..50.0),
                bus_id: rng.random_range(0..n_bus),
            }
        })
        .collect();
    let lines = if n_bus == 2 {
        vec![Line {
            p_min: -60.0,
            p_max: 60.0,
            from_bus: 0,
            to_bus: 1,
            susceptance: 1.0,
        }]
    } else {
        Vec::new()
    };
    let cap: f64 = generators.iter().map(|g| g.p_max).sum();
    let mut load = vec![vec![0.0; horizon]; n_bus];
    for t in 0..horizon {
        let total = cap * rng.random_range(0.25..0.75);
        let split = if n_bus == 2 { rng.random_range(0.3..0.7) } else { 1.0 };
        load[0][t] = total * split;
        if n_bus == 2 {
            load[1][t] = total * (1.0 - split);
        }
    }
    let farms = if rng.random_bool(0.5) {
        vec![RenewableFarm {
            kind: FarmKind::Wind,
            bus_id: 0,
            forecast: (0..horizon).map(|_| rng.random_range(0.0..0.2) * cap).collect(),
            curtail_penalty: rng.random_range(20.0..60.0),
        }]
    } else {
        Vec::new()
    };
    let system: Vec<f64> = (0..horizon).map(|t| load.iter().map(|r| r[t]).sum()).collect();
    PcmInstance {
        horizon_t: horizon,
        buses: (0..n_bus).collect(),
        generators,
        lines,
        farms,
        load,
        reserve_up: system.iter().map(|d| 0.05 * d).collect(),
        reserve_down: system.iter().map(|d| 0.02 * d).collect(),
        seed,
    }
}
