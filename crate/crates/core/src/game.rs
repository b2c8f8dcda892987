//! Base games, the transformed deciders' game, pure Nash equilibria and the
//! prisoner's-dilemma regime map.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::graph::{HierarchyGraph, Role, VertexId};
use crate::influence::{pattern_index, GraphInfluence, InfluenceModel, InfluenceOracle, InfluenceTable, Summary};
use crate::payoff::{path_share_matrix, shapley_shares, ShareMatrix};
use crate::scalar::Scalar;
use crate::spin::Spin;
use crate::vote::{VoteMode, VoteParams};
use crate::{Error, Result};

/// Display labels of the two moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveLabels {
    pub up: String,
    pub down: String,
}

impl Default for MoveLabels {
    fn default() -> Self {
        Self { up: "C".into(), down: "D".into() }
    }
}

impl MoveLabels {
    pub fn label(&self, s: Spin) -> &str {
        match s {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        }
    }

    pub fn parse(&self, label: &str) -> Option<Spin> {
        if label == self.up {
            Some(Spin::Up)
        } else if label == self.down {
            Some(Spin::Down)
        } else {
            None
        }
    }
}

/// Two-move game among the executives.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormGame<T> {
    players: Vec<String>,
    labels: MoveLabels,
    /// Indexed by outcome (bit j set: player j plays −1), then player.
    payoffs: Vec<Vec<T>>,
}

/// Upper bound on executives in a base game.
pub const MAX_PLAYERS: usize = 16;

impl<T: Scalar> NormalFormGame<T> {
    pub fn new(players: Vec<String>, labels: MoveLabels, table: Vec<(Vec<Spin>, Vec<T>)>) -> Result<Self> {
        let n = players.len();
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::InvalidGame(format!("{n} players; expected 1..={MAX_PLAYERS}")));
        }
        if labels.up == labels.down {
            return Err(Error::InvalidGame("move labels must differ".into()));
        }
        for (k, p) in players.iter().enumerate() {
            if players[..k].contains(p) {
                return Err(Error::InvalidGame(format!("duplicate player {p}")));
            }
        }
        let mut payoffs: Vec<Option<Vec<T>>> = vec![None; 1 << n];
        for (profile, u) in table {
            if profile.len() != n || u.len() != n {
                return Err(Error::InvalidGame(format!("profile entries must have {n} moves and {n} payoffs")));
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGame("payoffs must be finite".into()));
            }
            let slot = &mut payoffs[pattern_index(&profile)];
            if slot.is_some() {
                return Err(Error::InvalidGame(format!("duplicate profile {}", render(&profile, &labels))));
            }
            *slot = Some(u);
        }
        let payoffs = payoffs
            .into_iter()
            .enumerate()
            .map(|(k, u)| {
                u.ok_or_else(|| {
                    Error::InvalidGame(format!("missing profile {}", render(&outcome_spins(k, n), &labels)))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { players, labels, payoffs })
    }

    /// The two-player prisoner's dilemma with C ↦ +1 and D ↦ −1.
    pub fn prisoners_dilemma() -> Self {
        let (c, d) = (Spin::Up, Spin::Down);
        let u = |a: f64, b: f64| vec![T::lit(a), T::lit(b)];
        Self::new(
            vec!["1".into(), "2".into()],
            MoveLabels::default(),
            vec![
                (vec![c, c], u(1.0, 1.0)),
                (vec![c, d], u(-3.0, 3.0)),
                (vec![d, c], u(3.0, -3.0)),
                (vec![d, d], u(-1.0, -1.0)),
            ],
        )
        .expect("prisoner's dilemma table is complete")
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn labels(&self) -> &MoveLabels {
        &self.labels
    }

    pub fn payoff(&self, profile: &[Spin]) -> &[T] {
        &self.payoffs[pattern_index(profile)]
    }

    /// `(profile, payoffs)` in outcome order.
    pub fn table(&self) -> impl Iterator<Item = (Vec<Spin>, &[T])> + '_ {
        let n = self.players.len();
        self.payoffs.iter().enumerate().map(move |(k, u)| (outcome_spins(k, n), u.as_slice()))
    }

    /// Strategy 0 is `+1`, strategy 1 is `−1` for every player.
    pub fn as_strategic(&self) -> StrategicGame<T> {
        StrategicGame {
            players: self.players.clone(),
            strategies: vec![2; self.players.len()],
            payoffs: self.payoffs.clone(),
        }
    }
}

fn outcome_spins(k: usize, n: usize) -> Vec<Spin> {
    (0..n).map(|j| Spin::from_bit(k >> j & 1 == 1)).collect()
}

fn render(moves: &[Spin], labels: &MoveLabels) -> String {
    let parts: Vec<&str> = moves.iter().map(|&s| labels.label(s)).collect();
    format!("({})", parts.join(","))
}

/// Finite game in strategic form. Profiles are indexed in mixed radix with
/// player 0 least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategicGame<T> {
    players: Vec<String>,
    strategies: Vec<usize>,
    payoffs: Vec<Vec<T>>,
}

impl<T: Scalar> StrategicGame<T> {
    pub fn new(players: Vec<String>, strategies: Vec<usize>, payoffs: Vec<Vec<T>>) -> Result<Self> {
        if players.len() != strategies.len() || strategies.contains(&0) {
            return Err(Error::InvalidGame("every player needs at least one strategy".into()));
        }
        let count = strategies.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
        if count != Some(payoffs.len()) || payoffs.iter().any(|u| u.len() != players.len()) {
            return Err(Error::InvalidGame("payoff tensor does not match the strategy counts".into()));
        }
        Ok(Self { players, strategies, payoffs })
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn strategies(&self) -> &[usize] {
        &self.strategies
    }

    pub fn profile_count(&self) -> usize {
        self.payoffs.len()
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strategies).rev().fold(0, |acc, (&s, &n)| acc * n + s)
    }

    pub fn profile(&self, mut index: usize) -> Vec<usize> {
        self.strategies
            .iter()
            .map(|&n| {
                let s = index % n;
                index /= n;
                s
            })
            .collect()
    }

    pub fn payoff(&self, profile: &[usize]) -> &[T] {
        &self.payoffs[self.index(profile)]
    }

    pub fn payoffs(&self) -> &[Vec<T>] {
        &self.payoffs
    }

    /// Profiles where no player gains more than the tolerance by deviating
    /// alone, in index order.
    pub fn pure_nash(&self) -> Vec<Vec<usize>> {
        let tol = T::tolerance(1e-12);
        let strides: Vec<usize> = self
            .strategies
            .iter()
            .scan(1usize, |acc, &n| {
                let s = *acc;
                *acc *= n;
                Some(s)
            })
            .collect();
        (0..self.payoffs.len())
            .filter(|&k| {
                let profile = self.profile(k);
                (0..self.players.len()).all(|p| {
                    let base = k - profile[p] * strides[p];
                    let current = self.payoffs[k][p];
                    (0..self.strategies[p]).all(|s| !(self.payoffs[base + s * strides[p]][p] > current + tol))
                })
            })
            .map(|k| self.profile(k))
            .collect()
    }
}

/// Commands of every decider to every executive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommandProfile {
    /// `commands[λ][i]`.
    pub commands: Vec<Vec<Spin>>,
}

impl CommandProfile {
    /// Strategy `s` of a decider commands executive `i` to play −1 iff bit
    /// `i` of `s` is set.
    pub fn from_strategies(strategies: &[usize], executives: usize) -> Self {
        Self {
            commands: strategies
                .iter()
                .map(|&s| (0..executives).map(|i| Spin::from_bit(s >> i & 1 == 1)).collect())
                .collect(),
        }
    }

    pub fn strategies(&self) -> Vec<usize> {
        self.commands.iter().map(|c| pattern_index(c)).collect()
    }

    pub fn command(&self, decider: usize, executive: usize) -> Spin {
        self.commands[decider][executive]
    }

    /// Commands of all deciders on executive `i`.
    pub fn column(&self, executive: usize) -> Vec<Spin> {
        self.commands.iter().map(|c| c[executive]).collect()
    }

    pub fn render(&self, labels: &MoveLabels) -> String {
        let parts: Vec<String> = self.commands.iter().map(|c| render(c, labels)).collect();
        format!("({})", parts.join(","))
    }

    pub fn parse(text: &str, labels: &MoveLabels) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed command profile {text:?}"));
        let inner = text
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut commands = Vec::new();
        for group in inner.split("),") {
            let g = group.trim().trim_start_matches('(').trim_end_matches(')');
            let row = g
                .split(',')
                .map(|m| labels.parse(m.trim()).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?;
            commands.push(row);
        }
        if commands.iter().any(|c| c.len() != commands[0].len()) {
            return Err(bad());
        }
        Ok(Self { commands })
    }
}

impl fmt::Display for CommandProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&MoveLabels::default()))
    }
}

/// Which payoff-collection mechanism splits executive payoffs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mechanism {
    #[default]
    Shapley,
    Shares,
}

impl Mechanism {
    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Shapley => "shapley",
            Mechanism::Shares => "shares",
        }
    }
}

impl FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shapley" => Ok(Mechanism::Shapley),
            "shares" => Ok(Mechanism::Shares),
            _ => Err(Error::Parse(format!("unknown mechanism {s:?}"))),
        }
    }
}

/// Where a transformed game came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub source: Option<String>,
    pub mechanism: Mechanism,
    pub model: Option<InfluenceModel>,
    pub free_float: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub mode: Option<VoteMode>,
}

impl Provenance {
    fn bare(mechanism: Mechanism) -> Self {
        Self { source: None, mechanism, model: None, free_float: None, noise_sigma: None, mode: None }
    }
}

/// The deciders' game: each decider picks one command per executive.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedGame<T> {
    pub game: StrategicGame<T>,
    pub executives: Vec<String>,
    pub labels: MoveLabels,
    pub shares: ShareMatrix<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> TransformedGame<T> {
    pub fn deciders(&self) -> &[String] {
        self.game.players()
    }

    pub fn payoff(&self, profile: &CommandProfile) -> &[T] {
        self.game.payoff(&profile.strategies())
    }

    pub fn pure_nash(&self) -> Vec<CommandProfile> {
        self.game
            .pure_nash()
            .into_iter()
            .map(|p| CommandProfile::from_strategies(&p, self.executives.len()))
            .collect()
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.provenance.source = Some(source.into());
        self
    }
}

/// Upper bound on the number of command profiles of a transformed game.
pub const MAX_PROFILES: usize = 1 << 24;

/// Expected executive payoffs under the commands `sigma`.
pub fn pre_payoff<T: Scalar>(
    game: &NormalFormGame<T>,
    influence: &impl InfluenceOracle<T>,
    sigma: &CommandProfile,
) -> Result<Vec<T>> {
    let n = game.players().len();
    let p_up = (0..n)
        .map(|i| influence.prob_up(i, &sigma.column(i)))
        .collect::<Result<Vec<T>>>()?;
    Ok(expected_payoff(game, &p_up))
}

fn expected_payoff<T: Scalar>(game: &NormalFormGame<T>, p_up: &[T]) -> Vec<T> {
    let n = p_up.len();
    let mut acc = vec![T::zero(); n];
    for (k, u) in game.payoffs.iter().enumerate() {
        let w = (0..n).fold(T::one(), |w, j| w * if k >> j & 1 == 1 { T::one() - p_up[j] } else { p_up[j] });
        for (a, &v) in acc.iter_mut().zip(u) {
            *a = *a + w * v;
        }
    }
    acc
}

/// Builds the full payoff tensor `ν_λ(σ) = Σ_i φ_λ^(i)·E[u_i | σ]`.
pub fn assemble<T: Scalar>(
    game: &NormalFormGame<T>,
    influence: &impl InfluenceOracle<T>,
    shares: ShareMatrix<T>,
    provenance: Provenance,
) -> Result<TransformedGame<T>> {
    let n = game.players().len();
    if influence.executives() != game.players() || shares.executives() != game.players() {
        return Err(Error::InvalidGame(format!(
            "executives {:?} do not match players {:?}",
            influence.executives(),
            game.players()
        )));
    }
    if shares.deciders() != influence.deciders() {
        return Err(Error::InvalidGame("share matrix and influences disagree on the deciders".into()));
    }
    let m = influence.deciders().len();
    let per_decider = 1usize << n;
    let count = per_decider.checked_pow(m as u32).filter(|&c| c <= MAX_PROFILES).ok_or_else(|| {
        Error::InvalidParameter(format!("{per_decider}^{m} command profiles exceed {MAX_PROFILES}"))
    })?;
    let table = InfluenceTable::from_oracle(influence)?;
    let game_shape = StrategicGame {
        players: influence.deciders().to_vec(),
        strategies: vec![per_decider; m],
        payoffs: Vec::new(),
    };
    let payoffs: Vec<Vec<T>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let strategies = game_shape.profile(k);
            let p_up: Vec<T> = (0..n)
                .map(|i| {
                    let pattern = strategies
                        .iter()
                        .enumerate()
                        .fold(0, |acc, (lam, &s)| acc | ((s >> i & 1) << lam));
                    table.get(i, pattern)
                })
                .collect();
            let pre = expected_payoff(game, &p_up);
            (0..m)
                .map(|lam| (0..n).map(|i| shares.get(lam, i) * pre[i]).sum())
                .collect()
        })
        .collect();
    Ok(TransformedGame {
        game: StrategicGame { payoffs, ..game_shape },
        executives: game.players().to_vec(),
        labels: game.labels().clone(),
        shares,
        provenance,
    })
}

/// Runs the whole pipeline on a hierarchy graph whose executives are the
/// players of `game`.
pub fn transform_game<T: Scalar>(
    game: &NormalFormGame<T>,
    graph: &HierarchyGraph<T>,
    params: &VoteParams<T>,
    mechanism: Mechanism,
    model: InfluenceModel,
) -> Result<TransformedGame<T>> {
    let executives = game_executives(game, graph)?;
    let oracle = GraphInfluence::new(graph, &executives, *params, model)?;
    let table = InfluenceTable::from_oracle(&oracle)?;
    let shares = match mechanism {
        Mechanism::Shapley => shapley_shares(&table)?,
        Mechanism::Shares => path_share_matrix(graph, &executives)?,
    };
    let provenance = Provenance {
        source: None,
        mechanism,
        model: Some(model),
        free_float: Some(params.free_float.as_f64()),
        noise_sigma: Some(params.noise_sigma.as_f64()),
        mode: Some(params.mode),
    };
    assemble(game, &table, shares, provenance)
}

/// Looks up the players of `game` in the graph. If the graph tags
/// executives, they must be exactly the players.
pub fn game_executives<T: Scalar>(game: &NormalFormGame<T>, graph: &HierarchyGraph<T>) -> Result<Vec<VertexId>> {
    let ids = game
        .players()
        .iter()
        .map(|p| graph.lookup(p))
        .collect::<Result<Vec<_>>>()?;
    let tagged = graph.tagged(Role::Executive);
    if !tagged.is_empty() && (tagged.len() != ids.len() || ids.iter().any(|&v| !tagged.contains(v))) {
        return Err(Error::InvalidGame(format!(
            "graph executives {:?} do not match players {:?}",
            graph.ids(&tagged),
            game.players()
        )));
    }
    Ok(ids)
}

/// Transformed game of the two-decider summary model with Shapley shares.
pub fn transform_summary<T: Scalar>(game: &NormalFormGame<T>, summary: Summary<T>) -> Result<TransformedGame<T>> {
    if game.players().len() != 2 {
        return Err(Error::InvalidGame("summary influences describe two executives".into()));
    }
    let oracle = summary.oracle();
    let shares = shapley_shares(&oracle)?;
    let shares = ShareMatrix::new(shares.deciders().to_vec(), game.players().to_vec(), shares.entries().to_vec())?;
    let named = Renamed { inner: &oracle, executives: game.players() };
    assemble(game, &named, shares, Provenance::bare(Mechanism::Shapley))
}

struct Renamed<'a, O> {
    inner: &'a O,
    executives: &'a [String],
}

impl<T: Scalar, O: InfluenceOracle<T>> InfluenceOracle<T> for Renamed<'_, O> {
    fn deciders(&self) -> &[String] {
        self.inner.deciders()
    }

    fn executives(&self) -> &[String] {
        self.executives
    }

    fn prob_up(&self, executive: usize, commands: &[Spin]) -> Result<T> {
        self.inner.prob_up(executive, commands)
    }
}

/// Equilibrium regimes of the transformed prisoner's dilemma.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// Both deciders defect on their own executive's opponent: `((D,C),(C,D))`.
    PdV1,
    /// `((C,C),(C,C))`.
    Cooperation,
    /// `((C,D),(D,C))`.
    PdV2,
    /// `((D,D),(D,D))`, outside `1−y < x < y`.
    MutualDefection,
    /// Within the boundary tolerance of a tipping line.
    Boundary,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::PdV1 => "pd-v1",
            Regime::Cooperation => "cooperation",
            Regime::PdV2 => "pd-v2",
            Regime::MutualDefection => "mutual-defection",
            Regime::Boundary => "boundary",
        }
    }

    /// The unique pure equilibrium of an open regime.
    pub fn equilibrium(self) -> Option<CommandProfile> {
        let strategies = match self {
            Regime::PdV1 => [1, 2],
            Regime::Cooperation => [0, 0],
            Regime::PdV2 => [2, 1],
            Regime::MutualDefection => [3, 3],
            Regime::Boundary => return None,
        };
        Some(CommandProfile::from_strategies(&strategies, 2))
    }

    fn value<T: Scalar>(self, x: T, y: T) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        match self {
            Regime::PdV1 => -one + two * x,
            Regime::Cooperation => -one + two * y,
            Regime::PdV2 => one - two * x,
            Regime::MutualDefection | Regime::Boundary => one - two * y,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Regime::PdV1, Regime::Cooperation, Regime::PdV2, Regime::MutualDefection, Regime::Boundary]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown regime {s:?}")))
    }
}

/// Distance to a tipping line below which a point counts as boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeSummary<T> {
    pub summary: Summary<T>,
    pub regime: Regime,
    /// Open regimes touching the point, in order of increasing `x`.
    pub adjacent: Vec<Regime>,
    pub nash: Vec<CommandProfile>,
    pub value: Result<T, (T, T)>,
}

/// Regime intervals in `x` at fixed `y ∈ (1/2, 1]`.
fn regime_intervals<T: Scalar>(y: T) -> [(Regime, T, T); 5] {
    let one = T::one();
    let three = T::lit(3.0);
    let inf = T::infinity();
    let lines = [one - y, (T::lit(2.0) - y) / three, (y + one) / three, y];
    [
        (Regime::MutualDefection, -inf, lines[0]),
        (Regime::PdV1, lines[0], lines[1]),
        (Regime::Cooperation, lines[1], lines[2]),
        (Regime::PdV2, lines[2], lines[3]),
        (Regime::MutualDefection, lines[3], inf),
    ]
}

/// Classifies the symmetric transformed prisoner's dilemma at `(x, y)`.
pub fn classify_regime<T: Scalar>(summary: Summary<T>) -> Result<RegimeSummary<T>> {
    let Summary { x, y, x_bar, y_bar } = summary;
    let tol = T::tolerance(1e-12);
    if !((x - x_bar).abs() <= tol && (y - y_bar).abs() <= tol) {
        return Err(Error::OutsideScope(format!(
            "asymmetric influences (x, y, x̄, ȳ) = ({x}, {y}, {x_bar}, {y_bar})"
        )));
    }
    let half = T::lit(0.5);
    if !(y >= half && y <= T::one() && x >= T::zero() && x <= T::one()) {
        return Err(Error::OutsideScope(format!("(x, y) = ({x}, {y}) needs 0 <= x <= 1 and 1/2 <= y <= 1")));
    }
    let eps = T::tolerance(BOUNDARY_TOLERANCE);
    let mut adjacent: Vec<Regime> = Vec::new();
    for (r, lo, hi) in regime_intervals(y) {
        if x >= lo - eps && x <= hi + eps && adjacent.last() != Some(&r) {
            adjacent.push(r);
        }
    }
    let regime = if adjacent.len() == 1 { adjacent[0] } else { Regime::Boundary };
    let mut nash: Vec<CommandProfile> = adjacent.iter().filter_map(|r| r.equilibrium()).collect();
    nash.sort();
    nash.dedup();
    let values: Vec<T> = adjacent.iter().map(|r| r.value(x, y)).collect();
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    let value = if hi - lo <= tol { Ok(values[0]) } else { Err((lo, hi)) };
    Ok(RegimeSummary { summary, regime, adjacent, nash, value })
}

/// Payoff of either decider in the equilibrium at symmetric `(x, y)`.
pub fn game_value<T: Scalar>(x: T, y: T) -> Result<T> {
    classify_regime(Summary::symmetric(x, y))?.value.map_err(|(lo, hi)| Error::BoundaryValue {
        lower: lo.as_f64(),
        upper: hi.as_f64(),
    })
}
