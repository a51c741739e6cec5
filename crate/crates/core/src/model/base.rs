use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The atomic type of a pair of elements.
///
/// The derived order `E < N < Equal` is the canonical order used for sorting
/// type matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairType {
    E,
    N,
    Equal,
}

impl PairType {
    pub const ALL: [PairType; 3] = [PairType::E, PairType::N, PairType::Equal];

    /// `Eq`: an edge or equality.
    pub fn is_eq(self) -> bool {
        matches!(self, PairType::E | PairType::Equal)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> PairType {
        Self::ALL[i]
    }

    pub fn symbol(self) -> char {
        match self {
            PairType::E => 'E',
            PairType::N => 'N',
            PairType::Equal => '=',
        }
    }

    pub fn from_symbol(c: char) -> Option<PairType> {
        match c {
            'E' => Some(PairType::E),
            'N' => Some(PairType::N),
            '=' => Some(PairType::Equal),
            _ => None,
        }
    }

    /// Meet in the semilattice with `N` at the bottom and `E`, `=` incomparable.
    pub fn meet(self, other: PairType) -> PairType {
        if self == other {
            self
        } else {
            PairType::N
        }
    }
}

impl fmt::Display for PairType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A cardinal parameter: finite or countably infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Card {
    Finite(u32),
    Omega,
}

impl Card {
    pub fn finite(self) -> Option<u32> {
        match self {
            Card::Finite(n) => Some(n),
            Card::Omega => None,
        }
    }

    pub fn is_omega(self) -> bool {
        self == Card::Omega
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Card::Finite(n) => write!(f, "{n}"),
            Card::Omega => write!(f, "omega"),
        }
    }
}

impl Serialize for Card {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Card::Finite(n) => s.serialize_u32(*n),
            Card::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Card {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct CardVisitor;

        impl Visitor<'_> for CardVisitor {
            type Value = Card;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer or \"omega\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Card, E> {
                u32::try_from(v)
                    .map(Card::Finite)
                    .map_err(|_| E::custom("cardinal too large"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Card, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("cardinal must be non-negative"))
                    .and_then(|v| self.visit_u64(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Card, E> {
                match v {
                    "omega" | "ω" | "w" => Ok(Card::Omega),
                    _ => v
                        .parse::<u32>()
                        .map(Card::Finite)
                        .map_err(|_| E::custom(format!("bad cardinal `{v}`"))),
                }
            }
        }

        d.deserialize_any(CardVisitor)
    }
}

/// The homogeneous graph whose reducts are studied.
///
/// `Equality` is the degenerate base reached after collapsing a signature
/// onto an independent set or a clique: only `=` and `N` (read as
/// "distinct") occur there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BaseJson", into = "BaseJson")]
pub enum BaseStructure {
    /// The countable homogeneous universal K_n-free graph.
    Henson {
        n: u32,
    },
    /// The graph whose reflexive closure is an equivalence relation with
    /// `n` classes of size `s`.
    Equiv {
        n: Card,
        s: Card,
    },
    Equality,
}

impl BaseStructure {
    pub fn henson(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidBase(format!(
                "henson graphs need a clique bound n >= 3, got {n}"
            )));
        }
        Ok(BaseStructure::Henson { n })
    }

    pub fn equiv(n: Card, s: Card) -> Result<Self> {
        if n == Card::Finite(0) || s == Card::Finite(0) {
            return Err(Error::InvalidBase(
                "equiv parameters must be positive".into(),
            ));
        }
        match (n, s) {
            (Card::Omega, Card::Omega) => Err(Error::DelegatedBase(
                "equiv(omega,omega) is outside this classifier".into(),
            )),
            (Card::Finite(1), _) | (_, Card::Finite(1)) => Err(Error::DelegatedBase(format!(
                "equiv({n},{s}) is a reduct of equality or of a single class"
            ))),
            (Card::Finite(_), Card::Finite(_)) => Err(Error::InvalidBase(format!(
                "equiv({n},{s}) is finite; exactly one parameter must be omega"
            ))),
            _ => Ok(BaseStructure::Equiv { n, s }),
        }
    }

    pub fn equality() -> Self {
        BaseStructure::Equality
    }

    /// Shorthand for `equiv(omega, 2)`.
    pub fn omega_two() -> Self {
        BaseStructure::Equiv {
            n: Card::Omega,
            s: Card::Finite(2),
        }
    }

    /// Shorthand for `equiv(2, omega)`.
    pub fn two_omega() -> Self {
        BaseStructure::Equiv {
            n: Card::Finite(2),
            s: Card::Omega,
        }
    }

    /// Pair types that may occur in type matrices over this base.
    pub fn values(&self) -> &'static [PairType] {
        match self {
            BaseStructure::Equality => &[PairType::N, PairType::Equal],
            _ => &PairType::ALL,
        }
    }

    pub fn is_equality(&self) -> bool {
        matches!(self, BaseStructure::Equality)
    }
}

impl fmt::Display for BaseStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseStructure::Henson { n } => write!(f, "henson({n})"),
            BaseStructure::Equiv { n, s } => write!(f, "equiv({n},{s})"),
            BaseStructure::Equality => write!(f, "equality"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Card>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Card>,
}

impl TryFrom<BaseJson> for BaseStructure {
    type Error = Error;

    fn try_from(j: BaseJson) -> Result<Self> {
        match j.kind.as_str() {
            "henson" => {
                if j.s.is_some() {
                    return Err(Error::InvalidBase("henson takes no `s`".into()));
                }
                match j.n {
                    Some(Card::Finite(n)) => BaseStructure::henson(n),
                    Some(Card::Omega) => Err(Error::DelegatedBase(
                        "henson(omega) is the random graph".into(),
                    )),
                    None => Err(Error::InvalidBase("henson needs `n`".into())),
                }
            }
            "equiv" => match (j.n, j.s) {
                (Some(n), Some(s)) => BaseStructure::equiv(n, s),
                _ => Err(Error::InvalidBase("equiv needs `n` and `s`".into())),
            },
            "equality" => Ok(BaseStructure::Equality),
            other => Err(Error::InvalidBase(format!("unknown kind `{other}`"))),
        }
    }
}

impl From<BaseStructure> for BaseJson {
    fn from(b: BaseStructure) -> Self {
        match b {
            BaseStructure::Henson { n } => BaseJson {
                kind: "henson".into(),
                n: Some(Card::Finite(n)),
                s: None,
            },
            BaseStructure::Equiv { n, s } => BaseJson {
                kind: "equiv".into(),
                n: Some(n),
                s: Some(s),
            },
            BaseStructure::Equality => BaseJson {
                kind: "equality".into(),
                n: None,
                s: None,
            },
        }
    }
}
