//! Denoisers: the lifting denoiser (forward → shrink details → inverse), the
//! wavelet baselines and the pass-through baseline, all behind [`Denoiser`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{Decomposition, LiftingConfig, LiftingPlan};
use crate::registry::Registry;
use crate::signal::{validate_signal, Signal};
use crate::threshold::ThresholdScheme;
use crate::wavelet::{dwt_forward, dwt_inverse, WaveletFamily, WaveletSpec};

/// A signal-to-signal cleaning strategy. Output keeps shape and tags.
pub trait Denoiser: Send + Sync {
    fn name(&self) -> &str;
    fn denoise(&self, s: &Signal) -> Result<Signal>;
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MrdpiConfig {
    pub lifting: LiftingConfig,
    pub scheme: ThresholdScheme,
}

impl MrdpiConfig {
    /// The fifteen TES × SRL configurations, TES-major, on top of `base`.
    pub fn grid(base: &LiftingConfig) -> Vec<MrdpiConfig> {
        ThresholdScheme::grid_schemes()
            .into_iter()
            .flat_map(|scheme| {
                (1..=5).map(move |levels| MrdpiConfig {
                    lifting: LiftingConfig { levels, ..*base },
                    scheme: scheme.clone(),
                })
            })
            .collect()
    }
}

fn check_input(s: &Signal) -> Result<()> {
    validate_signal(s).map_err(|v| Error::InvalidSignal(v.to_string()))
}

/// Shrinks the details of `d` in place according to `scheme`.
pub fn shrink_decomposition(d: &mut Decomposition, scheme: &ThresholdScheme) -> Result<()> {
    let mut levels: Vec<Vec<f64>> = d.details.iter().map(|l| l.coeffs.clone()).collect();
    scheme.apply(&mut levels)?;
    for (l, g) in d.details.iter_mut().zip(levels) {
        l.coeffs = g;
    }
    Ok(())
}

/// Lifting denoiser.
#[derive(Debug, Clone)]
pub struct MrdpiDenoiser {
    pub config: MrdpiConfig,
}

impl MrdpiDenoiser {
    pub fn new(config: MrdpiConfig) -> Result<Self> {
        config.lifting.validate()?;
        crate::threshold::estimators().create(&config.scheme.kind, &())?;
        Ok(MrdpiDenoiser { config })
    }

    /// Per-channel decompositions and the plan that produced them.
    pub fn decompose(&self, s: &Signal) -> Result<(LiftingPlan, Vec<Decomposition>)> {
        check_input(s)?;
        let plan = LiftingPlan::regular(s.len(), &self.config.lifting)?;
        let ds = s.samples.iter().map(|ch| plan.forward(ch)).collect::<Result<Vec<_>>>()?;
        Ok((plan, ds))
    }

    /// Shrinks a copy of the given decompositions and inverts them.
    pub fn reconstruct(
        plan: &LiftingPlan,
        decomps: &[Decomposition],
        scheme: &ThresholdScheme,
    ) -> Result<Vec<Vec<f64>>> {
        decomps
            .iter()
            .map(|d| {
                let mut d = d.clone();
                shrink_decomposition(&mut d, scheme)?;
                plan.inverse(&d)
            })
            .collect()
    }
}

impl Denoiser for MrdpiDenoiser {
    fn name(&self) -> &str {
        "mrdpi"
    }

    fn denoise(&self, s: &Signal) -> Result<Signal> {
        if s.channels() == 0 {
            return Ok(s.clone());
        }
        let (plan, ds) = self.decompose(s)?;
        Ok(s.with_samples(Self::reconstruct(&plan, &ds, &self.config.scheme)?))
    }
}

/// Denoises one signal with the lifting denoiser.
pub fn denoise(s: &Signal, config: &MrdpiConfig) -> Result<Signal> {
    MrdpiDenoiser::new(config.clone())?.denoise(s)
}

/// DWT shrinkage with a fixed orthogonal filter bank.
#[derive(Debug, Clone)]
pub struct WaveletDenoiser {
    pub spec: WaveletSpec,
    pub scheme: ThresholdScheme,
}

impl WaveletDenoiser {
    pub fn new(family: WaveletFamily, levels: usize, scheme: ThresholdScheme) -> Result<Self> {
        crate::threshold::estimators().create(&scheme.kind, &())?;
        Ok(WaveletDenoiser { spec: WaveletSpec::new(family, levels)?, scheme })
    }
}

impl Denoiser for WaveletDenoiser {
    fn name(&self) -> &str {
        self.spec.family.name()
    }

    fn denoise(&self, s: &Signal) -> Result<Signal> {
        check_input(s)?;
        let channels = s
            .samples
            .iter()
            .map(|ch| {
                let mut p = dwt_forward(ch, &self.spec)?;
                self.scheme.apply(&mut p.details)?;
                dwt_inverse(&p, &self.spec)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(s.with_samples(channels))
    }
}

/// The unprocessed-data baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct OrgDat;

impl Denoiser for OrgDat {
    fn name(&self) -> &str {
        "orgdat"
    }

    fn denoise(&self, s: &Signal) -> Result<Signal> {
        Ok(s.clone())
    }
}

/// Identity pass-through.
pub fn orgdat(s: &Signal) -> Signal {
    s.clone()
}

/// Built-in denoisers. Wavelet baselines take their depth from
/// `config.lifting.levels` so level counts match the lifting denoiser.
pub fn denoisers() -> Registry<dyn Denoiser, MrdpiConfig> {
    let mut r: Registry<dyn Denoiser, MrdpiConfig> = Registry::new("denoiser");
    r.register("mrdpi", |c: &MrdpiConfig| Ok(Box::new(MrdpiDenoiser::new(c.clone())?) as Box<dyn Denoiser>));
    for fam in [WaveletFamily::Db4, WaveletFamily::Coif5] {
        r.register(fam.name(), move |c: &MrdpiConfig| {
            Ok(Box::new(WaveletDenoiser::new(fam, c.lifting.levels, c.scheme.clone())?) as Box<dyn Denoiser>)
        });
    }
    r.register("orgdat", |_: &MrdpiConfig| Ok(Box::new(OrgDat) as Box<dyn Denoiser>));
    r
}
