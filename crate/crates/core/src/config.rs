//! Configuration ingestion: presets, flat key/value files and flag overrides.
//!
//! Values resolve in three layers, later layers winning: the preset (the
//! file's `preset` key, the `--preset` flag, or `paper-fig1`), then the
//! file, then command-line flags. A config file is flat TOML:
//!
//! ```toml
//! agents = 20
//! horizon = 1000
//! mu = [11, 10, 10]
//! sigma = [1, 1, 1]
//! protocols = ["full", "explore-only"]
//! ```
//!
//! A JSON run manifest written by [`crate::output::emit_results`] is also
//! accepted; its `config` object is read as the file layer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NetworkGraph, RewardFamily, RewardModel, SimConfig};
use crate::montecarlo::ExperimentPlan;
use crate::protocol::ProtocolKind;

/// Every key a config file may set. All optional; missing keys fall back to
/// the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agents: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocols: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shared_randomness: Option<bool>,
}

impl RawConfig {
    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &RawConfig) -> RawConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            preset,
            agents,
            horizon,
            trials,
            xi,
            seed,
            protocols,
            family,
            mu,
            sigma,
            graph,
            edges,
            parallelism,
            shared_randomness
        );
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    agents: i64,
    trials: i64,
}

pub const PRESETS: [Preset; 2] = [
    Preset {
        name: "paper-fig1",
        description: "100 agents, 10 Gaussian arms (11 vs 10, sigma 1), complete graph, T=1000, 1000 trials, xi=1.01",
        agents: 100,
        trials: 1000,
    },
    Preset {
        name: "desk",
        description: "paper-fig1 scaled to 20 agents and 200 trials",
        agents: 20,
        trials: 200,
    },
];

pub const DEFAULT_PRESET: &str = "paper-fig1";
pub const DEFAULT_SEED: u64 = 20_200_101;

pub fn preset(name: &str) -> Result<RawConfig> {
    let p = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        Error::config(
            "preset",
            format!("unknown preset `{name}` (known: {})", names.join(", ")),
        )
    })?;
    let mut mu = vec![10.0; 10];
    mu[0] = 11.0;
    Ok(RawConfig {
        preset: Some(p.name.to_string()),
        agents: Some(p.agents),
        horizon: Some(1000),
        trials: Some(p.trials),
        xi: Some(1.01),
        seed: Some(DEFAULT_SEED),
        protocols: Some(
            ProtocolKind::ALL
                .iter()
                .map(|k| k.name().to_string())
                .collect(),
        ),
        family: Some(RewardFamily::Gaussian.name().to_string()),
        mu: Some(mu),
        sigma: Some(vec![1.0; 10]),
        graph: Some("complete".to_string()),
        edges: None,
        parallelism: Some(0),
        shared_randomness: Some(false),
    })
}

/// A fully resolved configuration. Serializes to the same flat keys as
/// [`RawConfig`], so it can be fed back in unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub preset: String,
    pub agents: usize,
    pub horizon: usize,
    pub trials: usize,
    pub xi: f64,
    pub seed: u64,
    pub protocols: Vec<ProtocolKind>,
    pub family: RewardFamily,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub graph: GraphKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<[usize; 2]>,
    pub parallelism: usize,
    pub shared_randomness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Complete,
    Ring,
    Star,
    Edges,
}

impl GraphKind {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(GraphKind::Complete),
            "ring" => Ok(GraphKind::Ring),
            "star" => Ok(GraphKind::Star),
            "edges" => Ok(GraphKind::Edges),
            other => Err(Error::config(
                "graph",
                format!("unknown graph `{other}` (expected complete, ring, star or edges)"),
            )),
        }
    }
}

fn positive(key: &str, v: Option<i64>) -> Result<usize> {
    match v {
        Some(n) if n > 0 => Ok(n as usize),
        Some(n) => Err(Error::config(
            key,
            format!("must be a positive integer, got {n}"),
        )),
        None => Err(Error::config(key, "missing")),
    }
}

fn required<T: Clone>(key: &str, v: &Option<T>) -> Result<T> {
    v.clone().ok_or_else(|| Error::config(key, "missing"))
}

impl ResolvedConfig {
    /// Validates a merged raw config. Every error names the offending key.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let agents = positive("agents", raw.agents)?;
        let horizon = positive("horizon", raw.horizon)?;
        let trials = positive("trials", raw.trials)?;

        let xi = required("xi", &raw.xi)?;
        if !(xi.is_finite() && xi > 1.0) {
            return Err(Error::config(
                "xi",
                format!("must satisfy xi > 1, got {xi}"),
            ));
        }

        let protocol_names = required("protocols", &raw.protocols)?;
        let mut protocols = Vec::with_capacity(protocol_names.len());
        for name in &protocol_names {
            let p: ProtocolKind = name
                .parse()
                .map_err(|e: Error| Error::config("protocols", e.to_string()))?;
            if protocols.contains(&p) {
                return Err(Error::config("protocols", format!("`{p}` is listed twice")));
            }
            protocols.push(p);
        }
        if protocols.is_empty() {
            return Err(Error::config(
                "protocols",
                "must name at least one protocol",
            ));
        }

        let family = match required("family", &raw.family)?.as_str() {
            "gaussian" => RewardFamily::Gaussian,
            "bernoulli" => RewardFamily::Bernoulli,
            other => {
                return Err(Error::config(
                    "family",
                    format!("unknown family `{other}` (expected gaussian or bernoulli)"),
                ))
            }
        };

        let mu = required("mu", &raw.mu)?;
        let sigma = required("sigma", &raw.sigma)?;
        if mu.len() < 2 {
            return Err(Error::config(
                "mu",
                format!("needs at least 2 arms, got {}", mu.len()),
            ));
        }
        if let Some(x) = mu.iter().find(|x| !x.is_finite()) {
            return Err(Error::config(
                "mu",
                format!("entries must be finite, got {x}"),
            ));
        }
        if sigma.len() != mu.len() {
            return Err(Error::config(
                "sigma",
                format!("has {} entries but mu has {}", sigma.len(), mu.len()),
            ));
        }
        if let Some(s) = sigma.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::config(
                "sigma",
                format!("entries must be > 0, got {s}"),
            ));
        }

        let graph = GraphKind::parse(&required("graph", &raw.graph)?)?;
        let edges = raw.edges.clone().unwrap_or_default();
        match (graph, edges.is_empty()) {
            (GraphKind::Edges, true) if agents > 1 => {
                return Err(Error::config("edges", "required when graph = \"edges\""))
            }
            (GraphKind::Complete | GraphKind::Ring | GraphKind::Star, false) => {
                return Err(Error::config(
                    "edges",
                    "only allowed when graph = \"edges\"",
                ))
            }
            _ => {}
        }

        let parallelism = match raw.parallelism {
            None => 0,
            Some(n) if n >= 0 => n as usize,
            Some(n) => {
                return Err(Error::config(
                    "parallelism",
                    format!("must be >= 0, got {n}"),
                ))
            }
        };

        let resolved = Self {
            preset: raw
                .preset
                .clone()
                .unwrap_or_else(|| DEFAULT_PRESET.to_string()),
            agents,
            horizon,
            trials,
            xi,
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            protocols,
            family,
            mu,
            sigma,
            graph,
            edges,
            parallelism,
            shared_randomness: raw.shared_randomness.unwrap_or(false),
        };
        // Surface model/graph construction errors under their keys now.
        resolved.model()?;
        resolved.network()?;
        Ok(resolved)
    }

    pub fn model(&self) -> Result<RewardModel> {
        RewardModel::from_lists(self.family, &self.mu, &self.sigma).map_err(|e| match e {
            Error::Usage(msg) => Error::config("mu", msg),
            other => other,
        })
    }

    pub fn network(&self) -> Result<NetworkGraph> {
        let g = match self.graph {
            GraphKind::Complete => NetworkGraph::complete(self.agents),
            GraphKind::Ring => NetworkGraph::ring(self.agents),
            GraphKind::Star => NetworkGraph::star(self.agents),
            GraphKind::Edges => {
                let pairs: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
                NetworkGraph::from_edges(self.agents, &pairs)
            }
        };
        g.map_err(|e| match e {
            Error::Usage(msg) => Error::config(
                if self.graph == GraphKind::Edges {
                    "edges"
                } else {
                    "agents"
                },
                msg,
            ),
            other => other,
        })
    }

    pub fn to_plan(&self) -> Result<ExperimentPlan> {
        let base = SimConfig::new(
            self.model()?,
            self.network()?,
            self.horizon,
            self.trials,
            self.xi,
            self.protocols[0],
            self.seed,
        )?;
        ExperimentPlan::new(
            base,
            self.protocols.clone(),
            self.parallelism,
            self.shared_randomness,
        )
    }

    /// The flat key/value form, as it would appear in a config file.
    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            preset: Some(self.preset.clone()),
            agents: Some(self.agents as i64),
            horizon: Some(self.horizon as i64),
            trials: Some(self.trials as i64),
            xi: Some(self.xi),
            seed: Some(self.seed),
            protocols: Some(
                self.protocols
                    .iter()
                    .map(|p| p.name().to_string())
                    .collect(),
            ),
            family: Some(self.family.name().to_string()),
            mu: Some(self.mu.clone()),
            sigma: Some(self.sigma.clone()),
            graph: Some(
                match self.graph {
                    GraphKind::Complete => "complete",
                    GraphKind::Ring => "ring",
                    GraphKind::Star => "star",
                    GraphKind::Edges => "edges",
                }
                .to_string(),
            ),
            edges: (!self.edges.is_empty()).then(|| self.edges.clone()),
            parallelism: Some(self.parallelism as i64),
            shared_randomness: Some(self.shared_randomness),
        }
    }
}

/// Reads the file layer: flat TOML, or the `config` object of a JSON manifest.
pub fn read_config_file(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let syntax = |message: String| Error::ConfigSyntax {
        path: path.to_path_buf(),
        message,
    };
    if path.extension().is_some_and(|ext| ext == "json") {
        #[derive(Deserialize)]
        struct ManifestConfig {
            config: RawConfig,
        }
        let m: ManifestConfig = serde_json::from_str(&text).map_err(|e| syntax(e.to_string()))?;
        Ok(m.config)
    } else {
        parse_config_str(&text).map_err(|e| match e {
            Error::ConfigSyntax { message, .. } => syntax(message),
            other => other,
        })
    }
}

pub fn parse_config_str(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::ConfigSyntax {
        path: "<inline>".into(),
        message: e.to_string(),
    })
}

/// Resolves preset, file and flag layers into a validated configuration.
pub fn resolve(file: Option<&RawConfig>, flags: &RawConfig) -> Result<ResolvedConfig> {
    let preset_name = flags
        .preset
        .as_deref()
        .or(file.and_then(|f| f.preset.as_deref()))
        .unwrap_or(DEFAULT_PRESET);
    let mut merged = preset(preset_name)?;
    if let Some(file) = file {
        merged = merged.overlay(file);
    }
    merged = merged.overlay(flags);
    merged.preset = Some(preset_name.to_string());
    ResolvedConfig::from_raw(&merged)
}

/// Reads `path` (if any) and resolves it with `flags` into an experiment plan.
pub fn parse_config(
    path: Option<&Path>,
    flags: &RawConfig,
) -> Result<(ResolvedConfig, ExperimentPlan)> {
    let file = path.map(read_config_file).transpose()?;
    let resolved = resolve(file.as_ref(), flags)?;
    let plan = resolved.to_plan()?;
    Ok((resolved, plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn paper_preset_matches_experiment_setup() {
        let r = resolve(None, &RawConfig::default()).unwrap();
        assert_eq!(r.preset, "paper-fig1");
        assert_eq!(r.agents, 100);
        assert_eq!(r.mu.len(), 10);
        assert_eq!(r.mu[0], 11.0);
        assert!(r.mu[1..].iter().all(|&m| m == 10.0));
        assert!(r.sigma.iter().all(|&s| s == 1.0));
        assert_eq!(r.graph, GraphKind::Complete);
        assert_eq!(r.horizon, 1000);
        assert_eq!(r.trials, 1000);
        assert_eq!(r.xi, 1.01);
        assert_eq!(r.protocols.len(), 4);
        assert_eq!(r.family, RewardFamily::Gaussian);
        let plan = r.to_plan().unwrap();
        assert_eq!(plan.base().graph().neighbors(0).len(), 99);
    }

    #[test]
    fn xi_at_or_below_one_is_rejected() {
        let file = parse_config_str("xi = 0.5").unwrap();
        let err = resolve(Some(&file), &RawConfig::default()).unwrap_err();
        assert!(err.to_string().contains("xi > 1"), "{err}");
        assert_eq!(key_of(err), "xi");
        let file = parse_config_str("xi = 1.0").unwrap();
        assert!(resolve(Some(&file), &RawConfig::default()).is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let file = parse_config_str("trials = 1000\nseed = 5").unwrap();
        let flags = RawConfig {
            trials: Some(50),
            ..Default::default()
        };
        let r = resolve(Some(&file), &flags).unwrap();
        assert_eq!(r.trials, 50);
        assert_eq!(r.seed, 5);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = parse_config_str("agentz = 3").unwrap_err();
        assert!(err.to_string().contains("agentz"), "{err}");
    }

    #[test]
    fn nonpositive_sizes_are_rejected() {
        for key in ["agents", "horizon", "trials"] {
            for v in [0, -3] {
                let file = parse_config_str(&format!("{key} = {v}")).unwrap();
                let err = resolve(Some(&file), &RawConfig::default()).unwrap_err();
                assert_eq!(key_of(err), key);
            }
        }
    }

    #[test]
    fn malformed_arm_lists_are_rejected() {
        let cases = [
            ("mu = [1.0]\nsigma = [1.0]", "mu"),
            ("mu = [1.0, 2.0]\nsigma = [1.0]", "sigma"),
            ("mu = [1.0, 2.0]\nsigma = [1.0, 0.0]", "sigma"),
            ("mu = [1.0, 2.0]\nsigma = [1.0, -2.0]", "sigma"),
        ];
        for (text, key) in cases {
            let file = parse_config_str(text).unwrap();
            let err = resolve(Some(&file), &RawConfig::default()).unwrap_err();
            assert_eq!(key_of(err), key, "{text}");
        }
        assert!(parse_config_str("mu = \"eleven\"").is_err());
    }

    #[test]
    fn graph_keys_are_checked() {
        let bad = [
            ("graph = \"torus\"", "graph"),
            ("graph = \"edges\"", "edges"),
            ("edges = [[0, 1]]", "edges"),
            ("agents = 3\ngraph = \"edges\"\nedges = [[0, 3]]", "edges"),
            ("protocols = [\"full\", \"full\"]", "protocols"),
            ("protocols = []", "protocols"),
            ("protocols = [\"gossip\"]", "protocols"),
            ("family = \"cauchy\"", "family"),
            ("preset = \"nope\"", "preset"),
        ];
        for (text, key) in bad {
            let file = parse_config_str(text).unwrap();
            let err = resolve(Some(&file), &RawConfig::default()).unwrap_err();
            assert_eq!(key_of(err), key, "{text}");
        }
        let file =
            parse_config_str("agents = 4\ngraph = \"edges\"\nedges = [[0, 1], [1, 2]]").unwrap();
        let r = resolve(Some(&file), &RawConfig::default()).unwrap();
        assert_eq!(r.network().unwrap().edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn resolved_config_reingests_to_itself() {
        let file =
            parse_config_str("preset = \"desk\"\nagents = 7\ngraph = \"ring\"\nseed = 3").unwrap();
        let r = resolve(Some(&file), &RawConfig::default()).unwrap();
        assert_eq!(r.agents, 7);
        assert_eq!(r.trials, 200);
        let again = resolve(Some(&r.to_raw()), &RawConfig::default()).unwrap();
        assert_eq!(again, r);
        let json = serde_json::to_string(&r).unwrap();
        let raw: RawConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(resolve(Some(&raw), &RawConfig::default()).unwrap(), r);
    }

    #[test]
    fn preset_flag_beats_file_preset() {
        let file = parse_config_str("preset = \"paper-fig1\"").unwrap();
        let flags = RawConfig {
            preset: Some("desk".into()),
            ..Default::default()
        };
        let r = resolve(Some(&file), &flags).unwrap();
        assert_eq!((r.preset.as_str(), r.agents), ("desk", 20));
    }
}
