//! Sample complexity of a linear classifier on translated objects, for raw
//! pixels, oracle-registered pixels and the invariant representation.

use std::path::{Path, PathBuf};

use irep_core::groups::GroupAction;
use irep_core::random::{gaussian_vector, seeded, substream, unit_vector, SeededRng};
use irep_core::representations::{represent, sample_templates, RepresentationConfig, TemplateBank};
use irep_core::signal::Signal;
use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Experiment, Header};
use crate::classifier::{feature_matrix, Rls};
use crate::config::{ExperimentConfig, GroupSpec, SampleComplexitySection, Section};
use crate::error::{Error, Result};
use crate::report::{self, Cell, Contract};

pub const CURVES_FILE: &str = "sample_complexity_curves.csv";

pub const REPRESENTATIONS: [&str; 3] = ["raw", "oracle", "invariant"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub representation: String,
    pub features: usize,
    pub points: Vec<CurvePoint>,
    /// Smallest grid `n` whose mean accuracy reaches the target.
    pub n_star: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleComplexityReport {
    #[serde(flatten)]
    pub header: Header,
    pub p: usize,
    pub patch: usize,
    pub noise: f64,
    pub trials: usize,
    pub test_size: usize,
    pub lambda: f64,
    pub target_accuracy: f64,
    pub templates: usize,
    pub curves: Vec<Curve>,
    pub n_star_raw: Option<usize>,
    pub n_star_oracle: Option<usize>,
    pub n_star_invariant: Option<usize>,
    /// `n_star(raw) / n_star(oracle)`; when raw never reaches the target
    /// the largest grid size stands in, giving a lower bound.
    pub ratio_raw_over_oracle: Option<f64>,
    pub ratio_is_lower_bound: bool,
    pub invariant_over_oracle: Option<f64>,
    /// `(p / patch)²`, the idealized count of object positions.
    pub ideal_ratio: f64,
    pub contracts: Vec<Contract>,
}

impl SampleComplexityReport {
    pub fn curve(&self, representation: &str) -> Option<&Curve> {
        self.curves
            .iter()
            .find(|c| c.representation == representation)
    }

    /// `representation, n, mean_accuracy, std_accuracy`.
    pub fn write_curves_csv(&self, dir: &Path) -> Result<PathBuf> {
        let rows: Vec<Vec<Cell>> = self
            .curves
            .iter()
            .flat_map(|c| {
                c.points.iter().map(move |pt| {
                    vec![
                        c.representation.clone().into(),
                        pt.n.into(),
                        pt.mean_accuracy.into(),
                        pt.std_accuracy.into(),
                    ]
                })
            })
            .collect();
        report::write_csv(
            dir,
            CURVES_FILE,
            &["representation", "n", "mean_accuracy", "std_accuracy"],
            &rows,
        )
    }
}

/// Two labeled object classes on the `p × p` torus.
#[derive(Debug, Clone)]
pub struct PatchDataset {
    action: GroupAction,
    /// Class images with the patch at the origin.
    bases: [Signal; 2],
    noise: f64,
}

/// A generated image together with its label (`±1`) and the translation used.
#[derive(Debug, Clone)]
pub struct Sample {
    pub image: Signal,
    pub label: f64,
    pub position: usize,
}

impl PatchDataset {
    pub fn new(
        p: usize,
        patch: usize,
        patches: [Vec<f64>; 2],
        noise: f64,
        max_order: usize,
    ) -> Result<Self> {
        if patches[0] == patches[1] {
            return Err(Error::config(
                "class patches are identical (degenerate classes)",
            ));
        }
        let action = GroupSpec::Torus { p }.build(max_order)?;
        let embed = |values: &[f64]| -> Result<Signal> {
            if values.len() != patch * patch || patch > p {
                return Err(Error::config(format!(
                    "a {patch}x{patch} patch needs {} values",
                    patch * patch
                )));
            }
            let mut img = vec![0.0; p * p];
            for r in 0..patch {
                img[r * p..r * p + patch].copy_from_slice(&values[r * patch..(r + 1) * patch]);
            }
            Ok(Signal::new(img)?)
        };
        Ok(Self {
            bases: [embed(&patches[0])?, embed(&patches[1])?],
            action,
            noise,
        })
    }

    /// Standard normal patches drawn from `seed`. Zero-mean pixels keep the
    /// two classes from sharing a large constant component.
    pub fn random_patches(patch: usize, seed: u64) -> [Vec<f64>; 2] {
        let mut rng = seeded(seed);
        let a = gaussian_vector(&mut rng, patch * patch);
        let b = gaussian_vector(&mut rng, patch * patch);
        [a, b]
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    /// Class `0` is labeled `+1`, class `1` is labeled `−1`.
    pub fn sample(&self, class: usize, rng: &mut SeededRng) -> Result<Sample> {
        let position = rng.random_range(0..self.action.order());
        let clean = self.action.act(position, &self.bases[class])?;
        let noise = gaussian_vector(rng, clean.dim());
        let image = Signal::new(
            clean
                .as_slice()
                .iter()
                .zip(&noise)
                .map(|(v, n)| v + self.noise * n)
                .collect(),
        )?;
        Ok(Sample {
            image,
            label: if class == 0 { 1.0 } else { -1.0 },
            position,
        })
    }

    /// The image translated back so the object sits at the origin.
    pub fn register(&self, s: &Sample) -> Result<Signal> {
        Ok(self
            .action
            .act(self.action.group().inverse(s.position), &s.image)?)
    }
}

struct Features {
    raw: Vec<f64>,
    oracle: Vec<f64>,
    invariant: Vec<f64>,
}

fn features(
    ds: &PatchDataset,
    s: &Sample,
    bank: &TemplateBank,
    rc: &RepresentationConfig,
) -> Result<Features> {
    Ok(Features {
        raw: s.image.as_slice().to_vec(),
        oracle: ds.register(s)?.into_vec(),
        invariant: represent(&s.image, bank, rc)?.values,
    })
}

/// Accuracies `[representation][grid index]` for one trial.
fn run_trial(
    ds: &PatchDataset,
    bank: &TemplateBank,
    rc: &RepresentationConfig,
    sec: &SampleComplexitySection,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let mut rng = seeded(seed);
    let max_n = *sec.grid.last().expect("validated grid");
    // classes alternate, so every even-length prefix is balanced
    let pool: Vec<(Features, f64)> = (0..max_n + sec.test_size)
        .map(|i| {
            let s = ds.sample(i % 2, &mut rng)?;
            Ok((features(ds, &s, bank, rc)?, s.label))
        })
        .collect::<Result<_>>()?;
    let (train, test) = pool.split_at(max_n);
    let pick: [fn(&Features) -> &Vec<f64>; 3] = [|f| &f.raw, |f| &f.oracle, |f| &f.invariant];
    let y_test = DVector::from_iterator(test.len(), test.iter().map(|(_, l)| *l));
    pick.iter()
        .map(|get| {
            let x_train = feature_matrix(
                &train
                    .iter()
                    .map(|(f, _)| get(f).clone())
                    .collect::<Vec<_>>(),
            );
            let x_test =
                feature_matrix(&test.iter().map(|(f, _)| get(f).clone()).collect::<Vec<_>>());
            sec.grid
                .iter()
                .map(|&n| {
                    let x = x_train.rows(0, n).into_owned();
                    let y = DVector::from_iterator(n, train[..n].iter().map(|(_, l)| *l));
                    Ok(Rls::fit(&x, &y, sec.lambda)?.accuracy(&x_test, &y_test))
                })
                .collect()
        })
        .collect()
}

/// Unit-norm Gaussian templates supported on the `side × side` window at
/// the origin of the `p × p` torus.
pub fn windowed_templates(
    action: &GroupAction,
    p: usize,
    side: usize,
    count: usize,
    seed: u64,
) -> Result<TemplateBank> {
    let mut rng = seeded(seed);
    let templates = (0..count)
        .map(|_| {
            let w = unit_vector(&mut rng, side * side)?;
            let mut img = vec![0.0; p * p];
            for r in 0..side {
                img[r * p..r * p + side].copy_from_slice(&w.as_slice()[r * side..(r + 1) * side]);
            }
            Ok(Signal::new(img)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TemplateBank::new(action, templates)?)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn run_sample_complexity(cfg: &ExperimentConfig) -> Result<SampleComplexityReport> {
    let sec = &cfg.sample_complexity;
    let seed = cfg.section_seed(Section::SampleComplexity);
    let patches = match &sec.patches {
        Some(p) => [p[0].clone(), p[1].clone()],
        None => PatchDataset::random_patches(sec.patch, substream(seed, 0)),
    };
    let ds = PatchDataset::new(sec.p, sec.patch, patches, sec.noise, cfg.max_group_order)?;
    let bank = match sec.template_support {
        Some(side) => {
            windowed_templates(ds.action(), sec.p, side, sec.templates, substream(seed, 1))?
        }
        None => sample_templates(ds.action(), sec.templates, substream(seed, 1))?,
    };
    let rc = RepresentationConfig {
        pooling: sec.pooling.build()?,
        normalize: sec.normalize,
    };
    let trials: Vec<Vec<Vec<f64>>> = (0..sec.trials)
        .into_par_iter()
        .map(|t| run_trial(&ds, &bank, &rc, sec, substream(seed, 2 + t as u64)))
        .collect::<Result<_>>()?;

    let widths = [
        sec.p * sec.p,
        sec.p * sec.p,
        sec.templates * rc.pooling.width(),
    ];
    let curves: Vec<Curve> = REPRESENTATIONS
        .iter()
        .enumerate()
        .map(|(r, name)| {
            let points: Vec<CurvePoint> = sec
                .grid
                .iter()
                .enumerate()
                .map(|(gi, &n)| {
                    let acc: Vec<f64> = trials.iter().map(|t| t[r][gi]).collect();
                    let (mean_accuracy, std_accuracy) = mean_std(&acc);
                    CurvePoint {
                        n,
                        mean_accuracy,
                        std_accuracy,
                    }
                })
                .collect();
            let n_star = points
                .iter()
                .find(|pt| pt.mean_accuracy >= sec.target_accuracy)
                .map(|pt| pt.n);
            Curve {
                representation: (*name).into(),
                features: widths[r],
                points,
                n_star,
            }
        })
        .collect();

    let (raw, oracle, inv) = (curves[0].n_star, curves[1].n_star, curves[2].n_star);
    let max_n = *sec.grid.last().expect("validated grid");
    let ratio = oracle.map(|o| raw.unwrap_or(max_n) as f64 / o as f64);
    let inv_ratio = oracle.and_then(|o| inv.map(|i| i as f64 / o as f64));
    let contracts = vec![
        Contract::at_least(
            "n_star(raw) / n_star(oracle)",
            ratio.unwrap_or(0.0),
            sec.min_ratio,
        ),
        Contract::at_most(
            "n_star(invariant) / n_star(oracle)",
            inv_ratio.unwrap_or(f64::MAX),
            sec.max_invariant_over_oracle,
        ),
    ];
    let side = sec.p as f64 / sec.patch as f64;
    Ok(SampleComplexityReport {
        header: Header::new(Experiment::SampleComplexity, seed),
        p: sec.p,
        patch: sec.patch,
        noise: sec.noise,
        trials: sec.trials,
        test_size: sec.test_size,
        lambda: sec.lambda,
        target_accuracy: sec.target_accuracy,
        templates: sec.templates,
        curves,
        n_star_raw: raw,
        n_star_oracle: oracle,
        n_star_invariant: inv,
        ratio_raw_over_oracle: ratio,
        ratio_is_lower_bound: raw.is_none() && oracle.is_some(),
        invariant_over_oracle: inv_ratio,
        ideal_ratio: side * side,
        contracts,
    })
}
