//! Communication regimes and neighbor broadcast.
//!
//! Full communication is the union of the two partial regimes: an agent
//! shares on exploit actions under [`ProtocolKind::ExploitOnly`], on explore
//! actions under [`ProtocolKind::ExploreOnly`], and always under
//! [`ProtocolKind::Full`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NetworkGraph;

/// Variant order matches the lexicographic order of [`ProtocolKind::name`],
/// so sorting by either gives the same result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    ExploitOnly,
    ExploreOnly,
    Full,
    NoComm,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [
        ProtocolKind::Full,
        ProtocolKind::ExploreOnly,
        ProtocolKind::ExploitOnly,
        ProtocolKind::NoComm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::ExploitOnly => "exploit-only",
            ProtocolKind::ExploreOnly => "explore-only",
            ProtocolKind::Full => "full",
            ProtocolKind::NoComm => "no-comm",
        }
    }

    /// Stable small integer used when mixing seeds.
    pub(crate) fn tag(self) -> u64 {
        match self {
            ProtocolKind::ExploitOnly => 1,
            ProtocolKind::ExploreOnly => 2,
            ProtocolKind::Full => 3,
            ProtocolKind::NoComm => 4,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Ok(ProtocolKind::Full),
            "explore-only" | "explore" => Ok(ProtocolKind::ExploreOnly),
            "exploit-only" | "exploit" => Ok(ProtocolKind::ExploitOnly),
            "no-comm" | "none" => Ok(ProtocolKind::NoComm),
            other => Err(Error::usage(format!(
                "unknown protocol `{other}` (expected full, explore-only, exploit-only or no-comm)"
            ))),
        }
    }
}

pub fn should_broadcast(kind: ProtocolKind, exploring: bool) -> bool {
    match kind {
        ProtocolKind::Full => true,
        ProtocolKind::ExploreOnly => exploring,
        ProtocolKind::ExploitOnly => !exploring,
        ProtocolKind::NoComm => false,
    }
}

/// One agent's shared observation for the current round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadcastMessage {
    pub sender: usize,
    pub arm: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub recipient: usize,
    pub arm: usize,
    pub reward: f64,
}

/// One delivery per neighbor of the sender.
pub fn fanout(graph: &NetworkGraph, msg: &BroadcastMessage) -> Vec<Delivery> {
    deliveries(graph, msg).collect()
}

/// Non-allocating form of [`fanout`].
pub fn deliveries<'a>(
    graph: &'a NetworkGraph,
    msg: &BroadcastMessage,
) -> impl Iterator<Item = Delivery> + 'a {
    let BroadcastMessage { arm, reward, .. } = *msg;
    graph
        .neighbors(msg.sender)
        .iter()
        .map(move |&recipient| Delivery {
            recipient,
            arm,
            reward,
        })
}
