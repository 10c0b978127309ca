//! Parsing of `--state` and `--map` specifications into library objects.

use anyhow::{anyhow, bail, Result};

use gmedet::gme::GmeMap;
use gmedet::maps::{pauli, LindbladSpec, SingleSiteMap};
use gmedet::qcore::SystemShape;
use gmedet::states;
use gmedet::DensityOperator;

pub const STATE_CATALOG: &[&str] = &[
    "ghz<N>                 pure N-qubit GHZ state (e.g. ghz3, ghz4)",
    "w<N>                   pure N-qubit W state, N >= 3 (e.g. w3)",
    "noisy-ghz<N>[:mu]      mu GHZ + (1-mu) I/2^N",
    "noisy-w<N>[:mu]        mu W + (1-mu) I/2^N",
    "ghz-w-mix[:mu]         mu GHZ3 + (1-mu) W3",
    "werner[:w]             2-qubit w |phi+><phi+| + (1-w) I/4",
    "maximally-mixed-<N>    I/2^N",
];

pub const MAP_CATALOG: &[&str] = &["transposition", "reduction", "lindblad:g1,g2,g3"];

pub const OBSERVABLE_CATALOG: &[&str] = &[
    "swap-triple            SWAP on two copies of every party",
    "cross:<i>,<j>          phi-hat on parties i and j (1-based), SWAP elsewhere",
    "term:<i1i2...>         product-term observable for a bipartition index string (1-based)",
];

/// A state specification: either a fixed state or a one-parameter family.
pub enum StateSpec {
    Fixed {
        label: String,
        state: DensityOperator,
    },
    Family(StateFamily),
}

/// A labelled `parameter -> state` generator over `[0, 1]`.
pub struct StateFamily {
    pub label: String,
    pub parameter_name: &'static str,
    pub n_sites: usize,
    generator: Box<dyn Fn(f64) -> Result<DensityOperator> + Sync>,
}

impl StateFamily {
    pub fn generate(&self, parameter: f64) -> Result<DensityOperator> {
        (self.generator)(parameter)
    }
}

impl StateSpec {
    pub fn n_sites(&self) -> usize {
        match self {
            StateSpec::Fixed { state, .. } => state.shape().num_sites(),
            StateSpec::Family(f) => f.n_sites,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            StateSpec::Fixed { label, .. } => label,
            StateSpec::Family(f) => &f.label,
        }
    }

    /// The fixed state, or an error for a parameter-free family reference.
    pub fn fixed(self) -> Result<(String, DensityOperator)> {
        match self {
            StateSpec::Fixed { label, state } => Ok((label, state)),
            StateSpec::Family(f) => bail!(
                "state family `{}` needs a parameter, e.g. `{}:{}=0.8` written as `{}:0.8`",
                f.label,
                f.label,
                f.parameter_name,
                f.label
            ),
        }
    }

    /// The family, or an error for a fixed state.
    pub fn family(self) -> Result<StateFamily> {
        match self {
            StateSpec::Family(f) => Ok(f),
            StateSpec::Fixed { label, .. } => {
                bail!("state `{label}` has no sweep parameter; pick a family such as noisy-ghz3")
            }
        }
    }
}

fn unknown_state(label: &str) -> anyhow::Error {
    let mut msg = format!("unknown state `{label}`; known states:\n");
    for entry in STATE_CATALOG {
        msg.push_str("  ");
        msg.push_str(entry);
        msg.push('\n');
    }
    anyhow!(msg)
}

fn parse_sites(label: &str, prefix: &str) -> Option<usize> {
    label.strip_prefix(prefix)?.parse().ok()
}

/// Parses `label[:parameter]`.
pub fn parse_state(spec: &str) -> Result<StateSpec> {
    let (label, param) = match spec.split_once(':') {
        Some((l, p)) => {
            let value: f64 = p
                .parse()
                .map_err(|_| anyhow!("state parameter `{p}` is not a number"))?;
            (l, Some(value))
        }
        None => (spec, None),
    };

    let family: Option<StateFamily> = if let Some(n) = parse_sites(label, "noisy-ghz") {
        if n < 2 {
            bail!("noisy-ghz needs at least 2 sites");
        }
        Some(StateFamily {
            label: label.to_string(),
            parameter_name: "mu",
            n_sites: n,
            generator: Box::new(move |mu| {
                Ok(states::white_noise_mix(&states::ghz(n), mu)?)
            }),
        })
    } else if let Some(n) = parse_sites(label, "noisy-w") {
        if n < 3 {
            bail!("noisy-w needs at least 3 sites");
        }
        Some(StateFamily {
            label: label.to_string(),
            parameter_name: "mu",
            n_sites: n,
            generator: Box::new(move |mu| {
                Ok(states::white_noise_mix(&states::w_state(n), mu)?)
            }),
        })
    } else if label == "ghz-w-mix" {
        Some(StateFamily {
            label: label.to_string(),
            parameter_name: "mu",
            n_sites: 3,
            generator: Box::new(|mu| Ok(states::convex_mix(&states::ghz(3), &states::w3(), mu)?)),
        })
    } else if label == "werner" {
        Some(StateFamily {
            label: label.to_string(),
            parameter_name: "w",
            n_sites: 2,
            generator: Box::new(|w| Ok(states::werner_2qubit(w)?)),
        })
    } else {
        None
    };

    if let Some(family) = family {
        return Ok(match param {
            Some(p) => StateSpec::Fixed {
                label: format!("{label}:{p}"),
                state: family.generate(p)?,
            },
            None => StateSpec::Family(family),
        });
    }

    if param.is_some() {
        bail!("state `{label}` takes no parameter");
    }
    let fixed = if let Some(n) = parse_sites(label, "ghz") {
        if n < 2 {
            bail!("ghz needs at least 2 sites");
        }
        states::ghz(n)
    } else if let Some(n) = parse_sites(label, "w") {
        if n < 3 {
            bail!("w needs at least 3 sites");
        }
        states::w_state(n)
    } else if let Some(n) = parse_sites(label, "maximally-mixed-") {
        states::maximally_mixed(SystemShape::qubits(n))
    } else {
        return Err(unknown_state(label));
    };
    Ok(StateSpec::Fixed {
        label: label.to_string(),
        state: fixed,
    })
}

/// Parses the base map spec (`transposition`, `reduction`,
/// `lindblad:g1,g2,g3`) and an optional `sx` modifier.
pub fn parse_map(spec: &str, modify: Option<&str>) -> Result<SingleSiteMap> {
    let base = if spec == "transposition" {
        SingleSiteMap::transposition(2)
    } else if spec == "reduction" {
        SingleSiteMap::reduction(2)
    } else if let Some(gs) = spec.strip_prefix("lindblad:") {
        let parts: Vec<&str> = gs.split(',').collect();
        if parts.len() != 3 {
            bail!("lindblad spec needs three coefficients, got `{gs}`");
        }
        let g: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| anyhow!("lindblad coefficient `{p}` is not a number"))
            })
            .collect::<Result<_>>()?;
        SingleSiteMap::from_lindblad(LindbladSpec::new(g[0], g[1], g[2])?)
    } else {
        bail!(
            "unknown map `{spec}`; known maps: {}",
            MAP_CATALOG.join(", ")
        );
    };
    match modify {
        None => Ok(base),
        Some("sx") => {
            let label = format!("sx*{}", base.label());
            Ok(base.compose_unitary_after(&pauli(0))?.with_label(label))
        }
        Some(other) => bail!("unknown modifier `{other}`; supported: sx"),
    }
}

/// `auto` or an explicit numeric constant.
pub fn parse_c(spec: Option<&str>) -> Result<Option<f64>> {
    match spec {
        None => Ok(None),
        Some("auto") => Ok(None),
        Some(v) => v
            .parse::<f64>()
            .map(Some)
            .map_err(|_| anyhow!("constant `{v}` is neither `auto` nor a number")),
    }
}

/// Assembles the GME map for `n` sites.
pub fn build_gme_map(n: usize, base: SingleSiteMap, c: Option<f64>) -> Result<GmeMap> {
    Ok(GmeMap::build(n, base, c, None)?)
}
