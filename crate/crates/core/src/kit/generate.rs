//! Synthetic benchmark instances.
//!
//! Customers are spread uniformly over a square, home sits at their
//! centroid and travel times are Euclidean distances times a speed factor.
//! This stands in for proprietary road-network data; it makes no claim about
//! the spatial structure of real sales territories.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::{classify_instance, select_mandatory, subsample_small};
use crate::error::{Error, Result};
use crate::instance::{Customer, Instance};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreMode {
    /// Scores supplied explicitly, one per customer.
    Given {
        scores: Vec<f64>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Log-uniform on `[lo, hi]`: many low scores, few high ones.
    Skewed {
        lo: f64,
        hi: f64,
    },
}

impl ScoreMode {
    fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            ScoreMode::Given { .. } => None,
            ScoreMode::Uniform { lo, hi } | ScoreMode::Skewed { lo, hi } => Some((lo, hi)),
        }
    }
}

impl FromStr for ScoreMode {
    type Err = Error;

    /// `uniform:LO:HI` or `skewed:LO:HI`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad =
            || Error::InvalidArgument(format!("expected uniform:LO:HI or skewed:LO:HI, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[1].parse().map_err(|_| bad())?;
        let hi: f64 = parts[2].parse().map_err(|_| bad())?;
        match parts[0] {
            "uniform" => Ok(ScoreMode::Uniform { lo, hi }),
            "skewed" => Ok(ScoreMode::Skewed { lo, hi }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub name: String,
    pub n_customers: usize,
    pub horizon_days: usize,
    pub service_min: f64,
    pub service_max: f64,
    pub score_mode: ScoreMode,
    pub mandatory_count: usize,
    pub max_daily_minutes: f64,
    /// Side length of the square customers are placed in.
    pub region_size: f64,
    pub minutes_per_unit: f64,
}

impl GenConfig {
    /// Five-day week, 15-45 min service, skewed scores from 60 to 2000.
    pub fn setn_like(n_customers: usize) -> Self {
        GenConfig {
            name: "setn".into(),
            n_customers,
            horizon_days: 5,
            service_min: 15.0,
            service_max: 45.0,
            score_mode: ScoreMode::Skewed {
                lo: 60.0,
                hi: 2000.0,
            },
            mandatory_count: 15,
            max_daily_minutes: 480.0,
            region_size: 160.0,
            minutes_per_unit: 1.0,
        }
    }

    /// Four days, one-hour visits, shorter drives, skewed scores 1 to 1300.
    pub fn setb_like(n_customers: usize) -> Self {
        GenConfig {
            name: "setb".into(),
            n_customers,
            horizon_days: 4,
            service_min: 60.0,
            service_max: 60.0,
            score_mode: ScoreMode::Skewed {
                lo: 1.0,
                hi: 1300.0,
            },
            mandatory_count: 15,
            max_daily_minutes: 480.0,
            region_size: 110.0,
            minutes_per_unit: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.mandatory_count > self.n_customers {
            return bad(format!(
                "mandatory count {} exceeds customer count {}",
                self.mandatory_count, self.n_customers
            ));
        }
        if self.horizon_days == 0 {
            return bad("horizon must be at least one day".into());
        }
        if !(self.service_min >= 0.0 && self.service_min <= self.service_max) {
            return bad(format!(
                "service range [{}, {}] is invalid",
                self.service_min, self.service_max
            ));
        }
        if let Some((lo, hi)) = self.score_mode.bounds() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return bad(format!("score range [{lo}, {hi}] is invalid"));
            }
            if matches!(self.score_mode, ScoreMode::Skewed { .. }) && lo <= 0.0 {
                return bad("skewed scores need a positive lower bound".into());
            }
        }
        if let ScoreMode::Given { scores } = &self.score_mode {
            if scores.len() != self.n_customers {
                return bad(format!(
                    "{} scores given for {} customers",
                    scores.len(),
                    self.n_customers
                ));
            }
        }
        if !(self.region_size >= 0.0 && self.minutes_per_unit > 0.0 && self.max_daily_minutes > 0.0)
        {
            return bad("region, speed and daily limit must be positive".into());
        }
        Ok(())
    }
}

fn draw(lo: f64, hi: f64, rng: &mut crate::rng::Rng) -> f64 {
    if lo == hi {
        lo
    } else {
        Uniform::new_inclusive(lo, hi)
            .expect("lo <= hi")
            .sample(rng)
    }
}

/// Synthesizes an instance; classes and the mandatory set are derived from
/// the drawn scores.
pub fn synthesize(config: &GenConfig, seed: u64) -> Result<Instance> {
    config.validate()?;
    let mut rng = seeded(derive_seed(seed, "synthesize", 0));
    let side = config.region_size;
    let mut customers = Vec::with_capacity(config.n_customers);
    for i in 0..config.n_customers {
        let x = draw(0.0, side, &mut rng);
        let y = draw(0.0, side, &mut rng);
        let service = draw(config.service_min, config.service_max, &mut rng).round();
        let score = match &config.score_mode {
            ScoreMode::Given { scores } => scores[i],
            ScoreMode::Uniform { lo, hi } => draw(*lo, *hi, &mut rng),
            ScoreMode::Skewed { lo, hi } => draw(lo.ln(), hi.ln(), &mut rng).exp().clamp(*lo, *hi),
        };
        customers.push(Customer::new(i as u32 + 1, service, score).at(x, y));
    }
    let inst = Instance::from_coordinates(
        config.name.clone(),
        config.horizon_days,
        config.max_daily_minutes,
        customers,
        None,
        config.minutes_per_unit,
    )?;
    let (classified, _) = classify_instance(&inst, derive_seed(seed, "synthesize-abc", 0));
    Ok(classified.with_mandatory(&select_mandatory(&classified, config.mandatory_count)))
}

/// Named instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 10 customers, 2 mandatory, 2 days, sampled from a SetN- or SetB-like source.
    Small10,
    /// 15 customers, 5 mandatory, 3 days.
    Small15,
    Setn,
    Setb,
    SetnLow,
    SetnHigh,
    SetbLow,
    SetbHigh,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Small10,
        Preset::Small15,
        Preset::Setn,
        Preset::Setb,
        Preset::SetnLow,
        Preset::SetnHigh,
        Preset::SetbLow,
        Preset::SetbHigh,
    ];

    /// Largest customer count an instance of this family can have.
    pub fn max_customers(self) -> usize {
        match self {
            Preset::Small10 => 10,
            Preset::Small15 => 15,
            Preset::Setn | Preset::SetnLow | Preset::SetnHigh => 283,
            Preset::Setb | Preset::SetbLow | Preset::SetbHigh => 55,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Preset::Small10 => "small10",
            Preset::Small15 => "small15",
            Preset::Setn => "setn",
            Preset::Setb => "setb",
            Preset::SetnLow => "setn-low",
            Preset::SetnHigh => "setn-high",
            Preset::SetbLow => "setb-low",
            Preset::SetbHigh => "setb-high",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.key())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{s}'")))
    }
}

/// The `index`-th instance of a preset family. Names are `<preset>-<index>`.
pub fn generate_preset(preset: Preset, index: usize, seed: u64) -> Result<Instance> {
    let s = derive_seed(seed, preset.key(), index as u64);
    let mut rng = seeded(s);
    let name = format!("{}-{:03}", preset.key(), index);
    let setn = |rng: &mut crate::rng::Rng| GenConfig::setn_like(rng.random_range(81..=283));
    let setb = |rng: &mut crate::rng::Rng| GenConfig::setb_like(rng.random_range(25..=55));
    let inst = match preset {
        Preset::Small10 | Preset::Small15 => {
            let source = if index.is_multiple_of(2) {
                setn(&mut rng)
            } else {
                setb(&mut rng)
            };
            let src = synthesize(&source, derive_seed(s, "source", 0))?;
            let (n, m, d) = if preset == Preset::Small10 {
                (10, 2, 2)
            } else {
                (15, 5, 3)
            };
            subsample_small(&src, n, m, d, derive_seed(s, "sample", 0))?
        }
        Preset::Setn => synthesize(&setn(&mut rng), s)?,
        Preset::Setb => synthesize(&setb(&mut rng), s)?,
        Preset::SetnLow | Preset::SetnHigh | Preset::SetbLow | Preset::SetbHigh => {
            let base = match preset {
                Preset::SetnLow | Preset::SetnHigh => setn(&mut rng),
                _ => setb(&mut rng),
            };
            let hi = match preset {
                Preset::SetnLow | Preset::SetbLow => 1000.0,
                _ => 25000.0,
            };
            let cfg = GenConfig {
                score_mode: ScoreMode::Uniform { lo: 1.0, hi },
                ..base
            };
            synthesize(&cfg, s)?
        }
    };
    Ok(inst.with_name(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setn_like_matches_ranges() {
        let inst = synthesize(&GenConfig::setn_like(150), 4).unwrap();
        assert_eq!(inst.len(), 150);
        assert_eq!(inst.horizon_days(), 5);
        assert_eq!(inst.max_daily_minutes(), 480.0);
        assert_eq!(inst.mandatory_ids().len(), 15);
        for c in inst.customers() {
            assert!((15.0..=45.0).contains(&c.service_time));
            assert!((60.0..=2000.0).contains(&c.score));
        }
    }

    #[test]
    fn single_customer_sits_at_home() {
        let cfg = GenConfig {
            mandatory_count: 0,
            ..GenConfig::setn_like(1)
        };
        let inst = synthesize(&cfg, 1).unwrap();
        assert_eq!(inst.travel(None, Some(0)), 0.0);
        assert_eq!(inst.travel(Some(0), None), 0.0);
    }

    #[test]
    fn byte_identical_under_seed() {
        let cfg = GenConfig::setb_like(40);
        assert_eq!(
            synthesize(&cfg, 77).unwrap().to_json_string(),
            synthesize(&cfg, 77).unwrap().to_json_string()
        );
        for p in Preset::ALL {
            let a = generate_preset(p, 3, 5).unwrap().to_json_string();
            assert_eq!(a, generate_preset(p, 3, 5).unwrap().to_json_string(), "{p}");
        }
    }

    #[test]
    fn small_presets_have_expected_shape() {
        let s = generate_preset(Preset::Small10, 0, 1).unwrap();
        assert_eq!(
            (s.len(), s.mandatory_ids().len(), s.horizon_days()),
            (10, 2, 2)
        );
        let s = generate_preset(Preset::Small15, 1, 1).unwrap();
        assert_eq!(
            (s.len(), s.mandatory_ids().len(), s.horizon_days()),
            (15, 5, 3)
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = GenConfig::setn_like(5);
        assert!(synthesize(&cfg, 1).is_err()); // 15 mandatory > 5 customers
        cfg.mandatory_count = 1;
        cfg.score_mode = ScoreMode::Uniform { lo: 5.0, hi: 1.0 };
        assert!(synthesize(&cfg, 1).is_err());
        assert_eq!(
            "uniform:1:1000".parse::<ScoreMode>().unwrap(),
            ScoreMode::Uniform {
                lo: 1.0,
                hi: 1000.0
            }
        );
    }
}
