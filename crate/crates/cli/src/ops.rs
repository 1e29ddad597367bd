//! Operator and kernel ids of the form `name[:args]`, e.g. `riesz:1,1`, `heat:0.5`.

use crate::error::{CliError, CliResult};
use igauss::pv::PvKernel;
use igauss::spectral::SpectralOp;
use igauss::MultiIndex;

#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Heat(f64),
    NegPower(f64),
    Riesz(MultiIndex),
    RieszBar(MultiIndex),
    Imaginary(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelId {
    Mehler(f64),
    NegPower(f64),
    Kbar(f64),
    Riesz(MultiIndex),
    RieszBar(MultiIndex),
    ClassicalRiesz(MultiIndex),
    Imaginary(f64),
}

fn split(spec: &str) -> (&str, &str) {
    match spec.split_once(':') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (spec.trim(), ""),
    }
}

fn real(name: &str, arg: &str) -> CliResult<f64> {
    arg.parse::<f64>().map_err(|_| CliError::Usage(format!("`{name}` needs a real argument, got `{arg}`")))
}

pub fn multi_index(arg: &str, dim: usize) -> CliResult<MultiIndex> {
    let parts: Result<Vec<u32>, _> = arg.split(',').map(|p| p.trim().parse::<u32>()).collect();
    let parts = parts.map_err(|_| CliError::Usage(format!("multi-index must be comma-separated naturals, got `{arg}`")))?;
    if parts.len() != dim {
        return Err(CliError::Usage(format!("multi-index `{arg}` has {} entries, dimension is {dim}", parts.len())));
    }
    let a = MultiIndex::new(parts);
    if a.is_zero() {
        return Err(CliError::Usage("multi-index must be nonzero".into()));
    }
    Ok(a)
}

impl Operator {
    pub fn parse(spec: &str, dim: usize) -> CliResult<Operator> {
        let (name, arg) = split(spec);
        Ok(match name {
            "heat" => Operator::Heat(real(name, arg)?),
            "neg-power" => Operator::NegPower(real(name, arg)?),
            "riesz" => Operator::Riesz(multi_index(arg, dim)?),
            "riesz-bar" => Operator::RieszBar(multi_index(arg, dim)?),
            "imaginary" => Operator::Imaginary(real(name, arg)?),
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown operator `{name}`; expected heat:t, neg-power:β, riesz:α, riesz-bar:α or imaginary:γ"
                )))
            }
        })
    }

    pub fn spectral(&self) -> SpectralOp {
        match self {
            Operator::Heat(t) => SpectralOp::Heat { t: *t },
            Operator::NegPower(b) => SpectralOp::NegPower { beta: *b },
            Operator::Riesz(a) => SpectralOp::Riesz { alpha: a.clone() },
            Operator::RieszBar(a) => SpectralOp::RieszBar { alpha: a.clone() },
            Operator::Imaginary(g) => SpectralOp::ImaginaryPower { gamma: *g },
        }
    }

    /// The principal-value kernel, `None` for the heat semigroup.
    pub fn pv_kernel(&self) -> Option<PvKernel> {
        match self {
            Operator::Heat(_) => None,
            Operator::NegPower(b) => Some(PvKernel::NegPower { beta: *b }),
            Operator::Riesz(a) => Some(PvKernel::Riesz { alpha: a.clone() }),
            Operator::RieszBar(a) => Some(PvKernel::RieszBar { alpha: a.clone() }),
            Operator::Imaginary(g) => Some(PvKernel::Imaginary { gamma: *g }),
        }
    }
}

impl KernelId {
    pub fn parse(spec: &str, dim: usize) -> CliResult<KernelId> {
        let (name, arg) = split(spec);
        Ok(match name {
            "mehler" => KernelId::Mehler(real(name, arg)?),
            "neg-power" => KernelId::NegPower(real(name, arg)?),
            "kbar" => KernelId::Kbar(real(name, arg)?),
            "riesz" => KernelId::Riesz(multi_index(arg, dim)?),
            "riesz-bar" => KernelId::RieszBar(multi_index(arg, dim)?),
            "classical-riesz" => KernelId::ClassicalRiesz(multi_index(arg, dim)?),
            "imaginary" => KernelId::Imaginary(real(name, arg)?),
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown kernel `{name}`; expected mehler:t, neg-power:β, kbar:β, riesz:α, riesz-bar:α, classical-riesz:α or imaginary:γ"
                )))
            }
        })
    }

    /// Grid dumps leave out `x = y` except for the heat kernel, which is smooth there.
    pub fn skips_diagonal(&self) -> bool {
        !matches!(self, KernelId::Mehler(_))
    }
}
