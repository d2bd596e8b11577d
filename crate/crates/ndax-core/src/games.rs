//! Reachability games against the environment: winning regions and
//! strategies for goal objectives, execution strategies for programs and
//! their environment duals, termination analysis, and weak plans.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::congolog::{build_config_graph, check_graph_situation_determined, ConfigGraph, Program};
use crate::domain::{
    eval_formula, Env, Formula, GroundAgentAction, GroundSystemAction, GroundTheory, State,
    StateStore, Value,
};
use crate::error::{Error, Result};
use crate::intern::Sym;
use crate::limits::Limits;

/// The agent's move at one state: stop, or hand an action to the
/// environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Stop,
    Act(GroundAgentAction),
}

/// A memoryless strategy over ground states.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Strategy {
    pub decisions: HashMap<State, Decision>,
}

/// Serialized form of a strategy: states as lists of true atoms, actions by
/// name and arguments, with "stop" reserved for the stopping decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyDoc {
    pub theory: String,
    pub decisions: Vec<DecisionDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionDoc {
    pub state: Vec<String>,
    pub action: String,
    #[serde(default)]
    pub args: Vec<String>,
}

impl Strategy {
    pub fn to_doc(&self, theory: &GroundTheory) -> StrategyDoc {
        let mut decisions: Vec<DecisionDoc> = self
            .decisions
            .iter()
            .map(|(state, decision)| {
                let state = theory.render_state(state);
                match decision {
                    Decision::Stop => {
                        DecisionDoc { state, action: "stop".to_string(), args: Vec::new() }
                    }
                    Decision::Act(act) => DecisionDoc {
                        state,
                        action: theory.names.resolve(act.name).to_string(),
                        args: act
                            .args
                            .iter()
                            .map(|&a| theory.names.resolve(a).to_string())
                            .collect(),
                    },
                }
            })
            .collect();
        decisions.sort_by(|a, b| a.state.cmp(&b.state));
        StrategyDoc { theory: theory.names.resolve(theory.name).to_string(), decisions }
    }

    pub fn from_doc(theory: &GroundTheory, doc: &StrategyDoc) -> Result<Strategy> {
        let theory_name = theory.names.resolve(theory.name);
        if doc.theory != theory_name {
            return Err(Error::spec(format!(
                "strategy is for theory {}, not {theory_name}",
                doc.theory
            )));
        }
        let mut decisions = HashMap::new();
        for entry in &doc.decisions {
            let state = parse_state(theory, &entry.state)?;
            let decision = if entry.action == "stop" {
                if !entry.args.is_empty() {
                    return Err(Error::spec("a stop decision takes no arguments"));
                }
                Decision::Stop
            } else {
                let name = theory.names.get(&entry.action).ok_or_else(|| {
                    Error::spec(format!("unknown action {} in strategy", entry.action))
                })?;
                let args = entry
                    .args
                    .iter()
                    .map(|a| {
                        theory.names.get(a).ok_or_else(|| {
                            Error::spec(format!("unknown object {a} in strategy"))
                        })
                    })
                    .collect::<Result<Vec<Sym>>>()?;
                Decision::Act(theory.ground_agent_action(name, args)?)
            };
            if decisions.insert(state, decision).is_some() {
                return Err(Error::spec(format!(
                    "two decisions for state {{{}}}",
                    entry.state.join(", ")
                )));
            }
        }
        Ok(Strategy { decisions })
    }

    pub fn from_json(theory: &GroundTheory, text: &str) -> Result<Strategy> {
        let doc: StrategyDoc = serde_json::from_str(text)
            .map_err(|e| Error::spec(format!("malformed strategy document: {e}")))?;
        Strategy::from_doc(theory, &doc)
    }

    pub fn to_json(&self, theory: &GroundTheory) -> String {
        let doc = self.to_doc(theory);
        let mut text = serde_json::to_string_pretty(&doc).expect("strategy doc serializes");
        text.push('\n');
        text
    }
}

fn parse_atom_text(text: &str) -> Result<(String, Vec<String>)> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::spec("empty atom in a strategy state"));
    }
    let Some(open) = text.find('(') else {
        return Ok((text.to_string(), Vec::new()));
    };
    if !text.ends_with(')') {
        return Err(Error::spec(format!("malformed atom {text}")));
    }
    let name = text[..open].trim().to_string();
    let inner = &text[open + 1..text.len() - 1];
    if name.is_empty() || inner.trim().is_empty() {
        return Err(Error::spec(format!("malformed atom {text}")));
    }
    let args = inner.split(',').map(|a| a.trim().to_string()).collect();
    Ok((name, args))
}

fn parse_state(theory: &GroundTheory, atoms: &[String]) -> Result<State> {
    let mut state = State::empty(theory.atoms.len());
    for text in atoms {
        let (name, args) = parse_atom_text(text)?;
        let fluent = theory
            .names
            .get(&name)
            .and_then(|sym| theory.fluent_id(sym).map(|id| (sym, id)))
            .ok_or_else(|| Error::spec(format!("unknown fluent {name} in strategy state")))?;
        let args = args
            .iter()
            .map(|a| {
                theory
                    .names
                    .get(a)
                    .ok_or_else(|| Error::spec(format!("unknown object {a} in atom {text}")))
            })
            .collect::<Result<Vec<Sym>>>()?;
        let atom = theory.atoms.atom_id(&theory.sorts, fluent.1, &args).ok_or_else(|| {
            Error::spec(format!("atom {text} does not fit the fluent's sorts"))
        })?;
        state.set(atom, true);
    }
    Ok(state)
}

/// Explicit game arena: states reachable from the initial ones, with the
/// agent's available actions and their reaction outcomes. States satisfying
/// the objective are not expanded.
struct Arena {
    store: StateStore,
    goal: Vec<bool>,
    moves: Vec<Vec<(GroundAgentAction, Vec<u32>)>>,
    roots: Vec<u32>,
}

fn build_arena(
    theory: &GroundTheory,
    initial: &[State],
    goal: &Formula,
    limits: &Limits,
) -> Result<Arena> {
    let actions = theory.ground_agent_actions();
    let mut store = StateStore::new();
    let mut goal_flags: Vec<bool> = Vec::new();
    let mut moves: Vec<Vec<(GroundAgentAction, Vec<u32>)>> = Vec::new();
    let mut roots = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();

    let insert = |state: State,
                  store: &mut StateStore,
                  goal_flags: &mut Vec<bool>,
                  queue: &mut VecDeque<u32>|
     -> Result<u32> {
        let before = store.len();
        let id = store.insert(state);
        if store.len() > before {
            if store.len() > limits.max_configs {
                return Err(Error::capacity(format!(
                    "game arena exceeds {} states",
                    limits.max_configs
                )));
            }
            let mut env = Env::plain();
            let holds = eval_formula(theory, store.state(id), &mut env, goal)?;
            goal_flags.push(holds);
            queue.push_back(id);
        }
        Ok(id)
    };

    for state in initial {
        let id = insert(state.clone(), &mut store, &mut goal_flags, &mut queue)?;
        roots.push(id);
    }

    while let Some(id) = queue.pop_front() {
        debug_assert_eq!(moves.len(), id as usize);
        if goal_flags[id as usize] {
            moves.push(Vec::new());
            continue;
        }
        let state = store.state(id).clone();
        let mut here = Vec::new();
        for act in &actions {
            if !theory.poss_ag(&state, act)? {
                continue;
            }
            let legal = theory.legal_reactions(&state, act)?;
            if legal.is_empty() {
                continue;
            }
            let mut succs = Vec::with_capacity(legal.len());
            for reaction in legal.iter() {
                let sys = GroundSystemAction {
                    action: act.action,
                    name: act.name,
                    args: act.args.clone(),
                    reaction: reaction.clone(),
                };
                let next = theory.successor(&state, &sys)?;
                succs.push(insert(next, &mut store, &mut goal_flags, &mut queue)?);
            }
            here.push((act.clone(), succs));
        }
        moves.push(here);
    }

    Ok(Arena { store, goal: goal_flags, moves, roots })
}

/// Solution of the game where the agent must reach the objective against
/// every environment reaction and then stop.
pub struct GoalGameSolution {
    pub store: StateStore,
    pub winning: Vec<bool>,
    pub ranks: Vec<u32>,
    pub strategy: Strategy,
    pub won: bool,
    pub states_explored: usize,
}

impl GoalGameSolution {
    pub fn state_wins(&self, state: &State) -> Option<bool> {
        self.store.get_id(state).map(|id| self.winning[id as usize])
    }
}

/// Computes the winning region of the objective-reaching game by fixpoint
/// iteration and extracts the strategy played from the initial states: stop
/// where the objective holds, otherwise the first available action whose
/// every outcome is closer to the objective. Action order is by name, then
/// by argument declaration order.
pub fn solve_goal_game(
    theory: &GroundTheory,
    initial: &[State],
    goal: &Formula,
    limits: &Limits,
) -> Result<GoalGameSolution> {
    let arena = build_arena(theory, initial, goal, limits)?;
    let n = arena.store.len();
    let mut ranks = vec![u32::MAX; n];
    for id in 0..n {
        if arena.goal[id] {
            ranks[id] = 0;
        }
    }
    let mut round = 0u32;
    loop {
        round += 1;
        let mut changed = false;
        for id in 0..n {
            if ranks[id] != u32::MAX {
                continue;
            }
            let wins = arena.moves[id]
                .iter()
                .any(|(_, succs)| succs.iter().all(|&t| ranks[t as usize] < round));
            if wins {
                ranks[id] = round;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let winning: Vec<bool> = ranks.iter().map(|&r| r != u32::MAX).collect();
    let won = arena.roots.iter().all(|&r| winning[r as usize]);

    let mut strategy = Strategy::default();
    let mut seen: HashSet<u32> = HashSet::new();
    let mut queue: VecDeque<u32> = arena
        .roots
        .iter()
        .copied()
        .filter(|&r| winning[r as usize])
        .collect();
    while let Some(id) = queue.pop_front() {
        if !seen.insert(id) {
            continue;
        }
        let state = arena.store.state(id).clone();
        if arena.goal[id as usize] {
            strategy.decisions.insert(state, Decision::Stop);
            continue;
        }
        let rank = ranks[id as usize];
        let (act, succs) = arena.moves[id as usize]
            .iter()
            .find(|(_, succs)| succs.iter().all(|&t| ranks[t as usize] < rank))
            .ok_or_else(|| {
                Error::execution("winning state lost its move during extraction")
            })?;
        strategy.decisions.insert(state, Decision::Act(act.clone()));
        queue.extend(succs.iter().copied());
    }

    Ok(GoalGameSolution {
        store: arena.store,
        winning,
        ranks,
        strategy,
        won,
        states_explored: n,
    })
}

/// Outcome of following a strategy from the initial states.
#[derive(Debug, Clone)]
pub struct StrategyReport {
    pub ok: bool,
    pub problems: Vec<String>,
    pub states_checked: usize,
}

/// Walks every play the strategy allows and checks that each one stops, at
/// a state satisfying the objective, after finitely many steps. A state
/// without a decision is an error; a losing play is reported in the result.
pub fn verify_strategy(
    theory: &GroundTheory,
    initial: &[State],
    strategy: &Strategy,
    goal: &Formula,
    limits: &Limits,
) -> Result<StrategyReport> {
    const ON_PATH: u8 = 1;
    const DONE: u8 = 2;

    struct Walk<'a> {
        theory: &'a GroundTheory,
        strategy: &'a Strategy,
        goal: &'a Formula,
        limits: &'a Limits,
        store: StateStore,
        status: Vec<u8>,
        problems: Vec<String>,
    }

    impl Walk<'_> {
        fn visit(&mut self, id: u32) -> Result<()> {
            match self.status[id as usize] {
                ON_PATH => {
                    let state = self.theory.render_state(self.store.state(id)).join(", ");
                    self.problems
                        .push(format!("play revisits state {{{state}}} before stopping"));
                    return Ok(());
                }
                DONE => return Ok(()),
                _ => {}
            }
            self.status[id as usize] = ON_PATH;
            let state = self.store.state(id).clone();
            let decision = match self.strategy.decisions.get(&state) {
                Some(decision) => decision.clone(),
                None => {
                    return Err(Error::StrategyIncomplete(format!(
                        "no decision for reachable state {{{}}}",
                        self.theory.render_state(&state).join(", ")
                    )));
                }
            };
            match decision {
                Decision::Stop => {
                    let mut env = Env::plain();
                    if !eval_formula(self.theory, &state, &mut env, self.goal)? {
                        self.problems.push(format!(
                            "stops at state {{{}}} where the objective fails",
                            self.theory.render_state(&state).join(", ")
                        ));
                    }
                }
                Decision::Act(act) => {
                    if !self.theory.poss_ag(&state, &act)? {
                        self.problems.push(format!(
                            "prescribes {} at state {{{}}} where it is not executable",
                            self.theory.render_agent_action(&act),
                            self.theory.render_state(&state).join(", ")
                        ));
                    } else {
                        let legal = self.theory.legal_reactions(&state, &act)?;
                        if legal.is_empty() {
                            self.problems.push(format!(
                                "prescribes {} at state {{{}}} where no reaction is legal",
                                self.theory.render_agent_action(&act),
                                self.theory.render_state(&state).join(", ")
                            ));
                        }
                        for reaction in legal.iter() {
                            let sys = GroundSystemAction {
                                action: act.action,
                                name: act.name,
                                args: act.args.clone(),
                                reaction: reaction.clone(),
                            };
                            let next = self.theory.successor(&state, &sys)?;
                            let nid = self.store.insert(next);
                            if self.store.len() > self.limits.max_configs {
                                return Err(Error::capacity(format!(
                                    "strategy verification exceeds {} states",
                                    self.limits.max_configs
                                )));
                            }
                            if self.status.len() < self.store.len() {
                                self.status.resize(self.store.len(), 0);
                            }
                            self.visit(nid)?;
                        }
                    }
                }
            }
            self.status[id as usize] = DONE;
            Ok(())
        }
    }

    let mut walk = Walk {
        theory,
        strategy,
        goal,
        limits,
        store: StateStore::new(),
        status: Vec::new(),
        problems: Vec::new(),
    };
    for state in initial {
        let id = walk.store.insert(state.clone());
        if walk.status.len() < walk.store.len() {
            walk.status.resize(walk.store.len(), 0);
        }
        walk.visit(id)?;
    }
    Ok(StrategyReport {
        ok: walk.problems.is_empty(),
        problems: walk.problems,
        states_checked: walk.store.len(),
    })
}

/// True when, from every given initial state, some choice of reactions
/// executes the whole action sequence and ends in a state satisfying the
/// objective.
pub fn weak_plan_check(
    theory: &GroundTheory,
    initial: &[State],
    plan: &[GroundAgentAction],
    goal: &Formula,
) -> Result<bool> {
    for start in initial {
        let mut reach: BTreeSet<State> = BTreeSet::new();
        reach.insert(start.clone());
        for act in plan {
            let mut next = BTreeSet::new();
            for state in &reach {
                for reaction in theory.legal_reactions(state, act)?.iter() {
                    let sys = GroundSystemAction {
                        action: act.action,
                        name: act.name,
                        args: act.args.clone(),
                        reaction: reaction.clone(),
                    };
                    next.insert(theory.successor(state, &sys)?);
                }
            }
            reach = next;
            if reach.is_empty() {
                break;
            }
        }
        let mut reached = false;
        for state in &reach {
            let mut env = Env::plain();
            if eval_formula(theory, state, &mut env, goal)? {
                reached = true;
                break;
            }
        }
        if !reached {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Searches breadth first for a shortest action sequence that some run
/// executes to the objective from every initial state. Ties break toward
/// the action enumeration order, so the result is deterministic.
pub fn weak_plan_search(
    theory: &GroundTheory,
    initial: &[State],
    goal: &Formula,
    max_len: usize,
    limits: &Limits,
) -> Result<Option<Vec<GroundAgentAction>>> {
    let actions = theory.ground_agent_actions();
    let mut store = StateStore::new();
    let mut goal_flags: Vec<bool> = Vec::new();

    let insert = |state: State, store: &mut StateStore, flags: &mut Vec<bool>| -> Result<u32> {
        let before = store.len();
        let id = store.insert(state);
        if store.len() > before {
            if store.len() > limits.max_configs {
                return Err(Error::capacity(format!(
                    "weak plan search exceeds {} states",
                    limits.max_configs
                )));
            }
            let mut env = Env::plain();
            flags.push(eval_formula(theory, store.state(id), &mut env, goal)?);
        }
        Ok(id)
    };

    let mut root: Vec<BTreeSet<u32>> = Vec::with_capacity(initial.len());
    for state in initial {
        let id = insert(state.clone(), &mut store, &mut goal_flags)?;
        root.push(BTreeSet::from([id]));
    }
    let solved =
        |node: &[BTreeSet<u32>], flags: &[bool]| node.iter().all(|part| part.iter().any(|&s| flags[s as usize]));
    if solved(&root, &goal_flags) {
        return Ok(Some(Vec::new()));
    }

    let mut visited: HashSet<Vec<BTreeSet<u32>>> = HashSet::new();
    visited.insert(root.clone());
    let mut queue: VecDeque<(Vec<BTreeSet<u32>>, Vec<GroundAgentAction>)> = VecDeque::new();
    queue.push_back((root, Vec::new()));

    while let Some((node, plan)) = queue.pop_front() {
        if plan.len() == max_len {
            continue;
        }
        'actions: for act in &actions {
            let mut next_node = Vec::with_capacity(node.len());
            for part in &node {
                let mut next_part = BTreeSet::new();
                for &sid in part {
                    let state = store.state(sid).clone();
                    for reaction in theory.legal_reactions(&state, act)?.iter() {
                        let sys = GroundSystemAction {
                            action: act.action,
                            name: act.name,
                            args: act.args.clone(),
                            reaction: reaction.clone(),
                        };
                        let next = theory.successor(&state, &sys)?;
                        next_part.insert(insert(next, &mut store, &mut goal_flags)?);
                    }
                }
                if next_part.is_empty() {
                    continue 'actions;
                }
                next_node.push(next_part);
            }
            let mut next_plan = plan.clone();
            next_plan.push(act.clone());
            if solved(&next_node, &goal_flags) {
                return Ok(Some(next_plan));
            }
            if visited.insert(next_node.clone()) {
                queue.push_back((next_node, next_plan));
            }
        }
    }
    Ok(None)
}

/// The agent's move at one program configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProgramDecision {
    Stop,
    Act(GroundAgentAction),
}

/// Solution of the game where the agent must drive a program to a final
/// configuration against every environment reaction.
pub struct ProgramGameSolution {
    pub graph: ConfigGraph,
    pub winning: Vec<bool>,
    pub ranks: Vec<u32>,
    pub decisions: Vec<Option<ProgramDecision>>,
    pub won: bool,
}

fn grouped_choices(
    theory: &GroundTheory,
    graph: &ConfigGraph,
    node: usize,
) -> Vec<(GroundAgentAction, Vec<usize>)> {
    let mut map: BTreeMap<(String, Vec<String>), (GroundAgentAction, Vec<usize>)> = BTreeMap::new();
    for (act, next) in &graph.edges[node] {
        let key = (
            theory.names.resolve(act.name).to_string(),
            act.args.iter().map(|&a| theory.names.resolve(a).to_string()).collect(),
        );
        let agent =
            GroundAgentAction { action: act.action, name: act.name, args: act.args.clone() };
        map.entry(key).or_insert_with(|| (agent, Vec::new())).1.push(*next);
    }
    map.into_values().collect()
}

/// Solves the execution game of a situation-determined program: the agent
/// picks transitions, the environment picks reactions, and the agent wins
/// by reaching a final configuration and stopping.
pub fn solve_program_game(
    theory: &GroundTheory,
    program: &Program,
    initial: &[State],
    limits: &Limits,
) -> Result<ProgramGameSolution> {
    let graph = build_config_graph(theory, program, initial, limits)?;
    check_graph_situation_determined(theory, &graph)?;
    let n = graph.len();
    let choices: Vec<Vec<(GroundAgentAction, Vec<usize>)>> =
        (0..n).map(|node| grouped_choices(theory, &graph, node)).collect();

    let mut ranks = vec![u32::MAX; n];
    for node in 0..n {
        if graph.finals[node] {
            ranks[node] = 0;
        }
    }
    let mut round = 0u32;
    loop {
        round += 1;
        let mut changed = false;
        for node in 0..n {
            if ranks[node] != u32::MAX {
                continue;
            }
            let wins = choices[node]
                .iter()
                .any(|(_, succs)| succs.iter().all(|&t| ranks[t] < round));
            if wins {
                ranks[node] = round;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let winning: Vec<bool> = ranks.iter().map(|&r| r != u32::MAX).collect();
    let won = graph.roots.iter().all(|&r| winning[r]);
    let mut decisions = Vec::with_capacity(n);
    for node in 0..n {
        if !winning[node] {
            decisions.push(None);
            continue;
        }
        if graph.finals[node] {
            decisions.push(Some(ProgramDecision::Stop));
            continue;
        }
        let rank = ranks[node];
        let act = choices[node]
            .iter()
            .find(|(_, succs)| succs.iter().all(|&t| ranks[t] < rank))
            .map(|(act, _)| act.clone())
            .ok_or_else(|| {
                Error::execution("winning configuration lost its move during extraction")
            })?;
        decisions.push(Some(ProgramDecision::Act(act)));
    }

    Ok(ProgramGameSolution { graph, winning, ranks, decisions, won })
}

/// True when every execution from the initial states can neither get stuck
/// in a non-final configuration nor run forever: each configuration is
/// final or has transitions that all inevitably terminate.
pub fn inevitably_terminates(
    theory: &GroundTheory,
    program: &Program,
    initial: &[State],
    limits: &Limits,
) -> Result<bool> {
    let graph = build_config_graph(theory, program, initial, limits)?;
    let mut done = graph.finals.clone();
    loop {
        let mut changed = false;
        for node in 0..graph.len() {
            if done[node] {
                continue;
            }
            if !graph.edges[node].is_empty()
                && graph.edges[node].iter().all(|(_, next)| done[*next])
            {
                done[node] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(graph.roots.iter().all(|&r| done[r]))
}

/// Solution of the dual execution game, where the environment picks
/// reactions and wins by steering every play into a configuration that is
/// final with no transitions left, completing the program no matter what
/// the agent does.
pub struct EnvGameSolution {
    pub graph: ConfigGraph,
    pub winning: Vec<bool>,
    pub ranks: Vec<u32>,
    /// Reaction the environment answers with, per winning configuration and
    /// agent move.
    pub choices: HashMap<(usize, GroundAgentAction), Value>,
    pub won: bool,
}

/// Solves the environment's side of the execution game. A configuration is
/// winning if it is final and has no transitions, or it has transitions and
/// for every action the agent may take some reaction leads back into the
/// winning set.
pub fn solve_env_game(
    theory: &GroundTheory,
    program: &Program,
    initial: &[State],
    limits: &Limits,
) -> Result<EnvGameSolution> {
    let graph = build_config_graph(theory, program, initial, limits)?;
    let n = graph.len();
    let choices_by_node: Vec<Vec<(GroundAgentAction, Vec<usize>)>> =
        (0..n).map(|node| grouped_choices(theory, &graph, node)).collect();

    let mut ranks = vec![u32::MAX; n];
    for node in 0..n {
        if graph.finals[node] && graph.edges[node].is_empty() {
            ranks[node] = 0;
        }
    }
    let mut round = 0u32;
    loop {
        round += 1;
        let mut changed = false;
        for node in 0..n {
            if ranks[node] != u32::MAX || graph.edges[node].is_empty() {
                continue;
            }
            let forced = choices_by_node[node]
                .iter()
                .all(|(_, succs)| succs.iter().any(|&t| ranks[t] < round));
            if forced {
                ranks[node] = round;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let winning: Vec<bool> = ranks.iter().map(|&r| r != u32::MAX).collect();
    let won = graph.roots.iter().all(|&r| winning[r]);
    let mut choices = HashMap::new();
    for node in 0..n {
        if !winning[node] || ranks[node] == 0 {
            continue;
        }
        let rank = ranks[node];
        for (agent, _) in &choices_by_node[node] {
            let answer = graph.edges[node]
                .iter()
                .find(|(act, next)| act.agent_part() == *agent && ranks[*next] < rank)
                .map(|(act, _)| act.reaction.clone())
                .ok_or_else(|| {
                    Error::execution("winning configuration lost its reaction during extraction")
                })?;
            choices.insert((node, agent.clone()), answer);
        }
    }

    Ok(EnvGameSolution { graph, winning, ranks, choices, won })
}
