use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::block::{Block, CompactTarget, BLOCK_VERSION};
use crate::hash::{Address, Hash};
use crate::mining::{mine, sample_mining_time, BlockTemplate, HashRate, MiningBudget};
use crate::protocol::{
    genesis_block, missing_txs, reconstruct_block, select_transactions, validate_advertised,
    validate_full_block, AcceptOutcome, Advert, BlockSeed, ChainState, NodeState, ReconstructError,
    RegisterOutcome, SelectionPolicy, TxRequest, TxResponse, ValidationVerdict,
};
use crate::simnet::log::{EventLog, LogRecord};
use crate::simnet::message::{dedup_key, gossip_dedup_key, Message};
use crate::simnet::scenario::{RelayStrategy, Scenario, ScenarioError};
use crate::simnet::topology::Network;
use crate::size::WireSize;
use crate::tx::{CoinbaseTransaction, OutPoint, Transaction, TxOut, DEFAULT_BLOCK_REWARD};

/// Seeds held while waiting for their advert, transactions or parent.
pub const PENDING_CAPACITY: usize = 32;
/// Header timestamps are this offset plus whole simulated seconds.
pub const GENESIS_TIME: u64 = 1_700_000_000;

const FUNDING_VALUE: u64 = 1_000;

// Independent rng streams derived from the scenario seed.
const STREAM_WORKLOAD: u64 = 1;
const STREAM_TOPOLOGY: u64 = 2;
const STREAM_LINKS: u64 = 3;
const STREAM_MINER_BASE: u64 = 1_000;

/// Runs a scenario to its horizon and returns the full event log. The log is
/// a pure function of the scenario, seed included.
pub fn run_scenario(scenario: &Scenario) -> Result<EventLog, ScenarioError> {
    let mut sim = Simulation::new(scenario)?;
    sim.run();
    Ok(sim.log)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug)]
enum EventKind {
    Deliver { from: usize, msg: Message },
    BlockFound { epoch: u64 },
    TxArrival { index: usize },
    StopMining,
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    node: usize,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // BinaryHeap is a max-heap; earliest (time, seq) must compare greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct MiningJob {
    epoch: u64,
    /// Frozen transaction list; `None` for late adverts, which pick at find time.
    txs: Option<Vec<Arc<Transaction>>>,
}

enum Pending {
    Seed { seed: Arc<BlockSeed>, from: usize, requested: bool },
    Full { block: Arc<Block>, from: usize },
}

impl Pending {
    fn block_hash(&self) -> Hash {
        match self {
            Pending::Seed { seed, .. } => seed.block_hash(),
            Pending::Full { block, .. } => block.hash(),
        }
    }
}

enum Progress {
    Done,
    Deferred(Pending),
}

struct SimNode {
    state: NodeState,
    rate: HashRate,
    rng: ChaCha8Rng,
    seen: HashSet<Hash>,
    store: HashMap<Hash, Arc<Transaction>>,
    job: Option<MiningJob>,
    epoch: u64,
    pending: VecDeque<Pending>,
    withholding: bool,
    /// Between a logged `MiningStarted` and `MiningStopped`.
    hashing: bool,
}

struct Workload {
    arrivals: Vec<(f64, usize)>,
    txs: Vec<Arc<Transaction>>,
}

impl Workload {
    fn generate(s: &Scenario) -> (Workload, Block) {
        let mut rng = stream(s.seed, STREAM_WORKLOAD);
        let gap = Exp::new(s.transactions.rate_per_sec).expect("validated rate");
        let mut arrivals = Vec::new();
        let mut t = 0.0;
        loop {
            t += gap.sample(&mut rng);
            if t > s.horizon_secs {
                break;
            }
            arrivals.push((t, rng.random_range(0..s.node_count)));
        }
        let funding = (0..arrivals.len())
            .map(|i| TxOut { address: Address::for_node(usize::MAX - i), value: FUNDING_VALUE })
            .collect();
        let genesis = genesis_block(funding, GENESIS_TIME);
        let funding_txid = genesis.transactions.first().map(|tx| tx.txid()).unwrap_or_default();
        let txs = (0..arrivals.len())
            .map(|i| {
                let mut payee = [0u8; 20];
                rng.fill(&mut payee);
                Arc::new(
                    Transaction::new(
                        vec![OutPoint::new(funding_txid, i as u32)],
                        vec![TxOut { address: Address(payee), value: FUNDING_VALUE }],
                        s.transactions.size_bytes,
                    )
                    .expect("validated transaction size"),
                )
            })
            .collect();
        (Workload { arrivals, txs }, genesis)
    }
}

struct Simulation {
    now: f64,
    seq: u64,
    queue: BinaryHeap<Event>,
    nodes: Vec<SimNode>,
    net: Network,
    log: EventLog,
    workload: Workload,
    strategy: RelayStrategy,
    timing_target: CompactTarget,
    header_target: CompactTarget,
    policy: SelectionPolicy,
    horizon: f64,
    processing_delay: f64,
    mining_cutoff: f64,
}

impl Simulation {
    fn new(s: &Scenario) -> Result<Self, ScenarioError> {
        s.validate()?;
        let net = Network::build(
            s.node_count,
            &s.topology,
            &s.links,
            &mut stream(s.seed, STREAM_TOPOLOGY),
            &mut stream(s.seed, STREAM_LINKS),
        )?;
        let (workload, genesis) = Workload::generate(s);
        let chain = ChainState::new(genesis);
        let policy = SelectionPolicy {
            max_block_size_bytes: s.max_block_size_bytes,
            coinbase_size_bytes: s.coinbase_size_bytes,
        };
        let nodes = (0..s.node_count)
            .map(|i| SimNode {
                state: NodeState::new(Address::for_node(i), chain.clone(), policy, true),
                rate: HashRate::new(s.node_hash_rate(i)).expect("validated rate"),
                rng: stream(s.seed, STREAM_MINER_BASE + i as u64),
                seen: HashSet::new(),
                store: HashMap::new(),
                job: None,
                epoch: 0,
                pending: VecDeque::new(),
                withholding: s.withholding_nodes.contains(&i),
                hashing: false,
            })
            .collect();
        let mut log = EventLog::default();
        log.push(LogRecord::Start {
            t: 0.0,
            node_count: s.node_count as u32,
            horizon: s.horizon_secs,
            strategy: s.strategy,
            seed: s.seed,
        });
        Ok(Simulation {
            now: 0.0,
            seq: 0,
            queue: BinaryHeap::new(),
            nodes,
            net,
            log,
            workload,
            strategy: s.strategy,
            timing_target: CompactTarget::new(s.difficulty_bits).expect("validated"),
            header_target: CompactTarget::new(s.header_pow_bits).expect("validated"),
            policy,
            horizon: s.horizon_secs,
            processing_delay: s.processing_delay_secs,
            mining_cutoff: s.mining_cutoff_secs.unwrap_or(f64::INFINITY),
        })
    }

    fn run(&mut self) {
        for n in 0..self.nodes.len() {
            self.start_mining(n, None);
        }
        if self.mining_cutoff <= self.horizon {
            for n in 0..self.nodes.len() {
                self.schedule(self.mining_cutoff, n, EventKind::StopMining);
            }
        }
        if let Some(&(t, node)) = self.workload.arrivals.first() {
            self.schedule(t, node, EventKind::TxArrival { index: 0 });
        }
        while let Some(event) = self.queue.pop() {
            if event.time > self.horizon {
                break;
            }
            self.now = event.time;
            match event.kind {
                EventKind::TxArrival { index } => self.on_tx_arrival(event.node, index),
                EventKind::BlockFound { epoch } => self.on_block_found(event.node, epoch),
                EventKind::Deliver { from, msg } => self.on_deliver(event.node, from, msg),
                // Past the cutoff a restart only stops the current round.
                EventKind::StopMining => self.start_mining(event.node, None),
            }
        }
        self.log.push(LogRecord::Horizon { t: self.horizon });
    }

    fn schedule(&mut self, time: f64, node: usize, kind: EventKind) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Event { time, seq, node, kind });
    }

    fn send(&mut self, src: usize, dst: usize, msg: Message) {
        let link = self.net.link_between(src, dst).expect("messages only travel over links");
        let size = msg.wire_size();
        let deliver_at = self.now + link.delay_for_bytes(size) + self.processing_delay;
        self.log.push(LogRecord::Send {
            t: self.now,
            deliver_at,
            src: src as u32,
            dst: dst as u32,
            msg: msg.kind(),
            size,
            id: msg.id(),
        });
        self.schedule(deliver_at, dst, EventKind::Deliver { from: src, msg });
    }

    /// Forwards to every neighbor except `except`, in neighbor order.
    fn flood(&mut self, src: usize, msg: &Message, except: Option<usize>) {
        let targets: Vec<usize> =
            self.net.neighbors(src).iter().map(|(n, _)| *n).filter(|n| Some(*n) != except).collect();
        for dst in targets {
            self.send(src, dst, msg.clone());
        }
    }

    fn first_sight(&mut self, node: usize, msg: &Message) -> bool {
        self.nodes[node].seen.insert(gossip_dedup_key(msg))
    }

    fn on_tx_arrival(&mut self, node: usize, index: usize) {
        let tx = Arc::clone(&self.workload.txs[index]);
        self.log.push(LogRecord::TxArrival { t: self.now, node: node as u32, txid: tx.txid() });
        self.accept_tx(node, tx, None);
        self.retry_pending(node);
        if let Some(&(t, next)) = self.workload.arrivals.get(index + 1) {
            self.schedule(t, next, EventKind::TxArrival { index: index + 1 });
        }
    }

    fn on_deliver(&mut self, node: usize, from: usize, msg: Message) {
        match &msg {
            Message::Transaction(tx) => {
                if self.accept_tx(node, Arc::clone(tx), Some(from)) {
                    self.retry_pending(node);
                }
            }
            Message::Advert(advert) => self.on_advert(node, from, &msg, advert),
            Message::TxRequest(req) => self.on_tx_request(node, from, req),
            Message::TxResponse(resp) => {
                let mut any = false;
                for tx in &resp.txs {
                    any |= self.accept_tx(node, Arc::clone(tx), Some(from));
                }
                if any {
                    self.retry_pending(node);
                }
            }
            Message::BlockSeed(seed) => {
                if !self.first_sight(node, &msg) || self.nodes[node].state.chain.contains(&seed.block_hash())
                {
                    return;
                }
                let pending = Pending::Seed { seed: Arc::clone(seed), from, requested: false };
                if let Progress::Deferred(p) = self.process(node, pending) {
                    self.defer(node, p);
                }
            }
            Message::FullBlock(block) => {
                if !self.first_sight(node, &msg) || self.nodes[node].state.chain.contains(&block.hash()) {
                    return;
                }
                let pending = Pending::Full { block: Arc::clone(block), from };
                if let Progress::Deferred(p) = self.process(node, pending) {
                    self.defer(node, p);
                }
            }
        }
    }

    /// Stores and pools a transaction seen for the first time, forwarding it
    /// if the mempool took it. Returns whether it was new to this node.
    fn accept_tx(&mut self, node: usize, tx: Arc<Transaction>, from: Option<usize>) -> bool {
        let msg = Message::Transaction(Arc::clone(&tx));
        if !self.first_sight(node, &msg) {
            return false;
        }
        let n = &mut self.nodes[node];
        n.store.insert(tx.txid(), Arc::clone(&tx));
        if n.state.receive_transaction(tx).is_ok() {
            self.flood(node, &msg, from);
        }
        true
    }

    fn on_advert(&mut self, node: usize, from: usize, msg: &Message, advert: &Arc<Advert>) {
        if !self.first_sight(node, msg) {
            return;
        }
        if self.nodes[node].state.registry.register(Advert::clone(advert))
            == RegisterOutcome::DuplicateRejected
        {
            return;
        }
        self.flood(node, msg, Some(from));
        let missing = missing_txs(advert, &self.nodes[node].store);
        if !missing.is_empty() {
            self.send(node, from, Message::TxRequest(Arc::new(TxRequest { hashes: missing })));
        }
        self.retry_pending(node);
    }

    fn on_tx_request(&mut self, node: usize, from: usize, req: &TxRequest) {
        let n = &self.nodes[node];
        if n.withholding {
            return;
        }
        let txs: Vec<_> = req.hashes.iter().filter_map(|h| n.store.get(h).cloned()).collect();
        if !txs.is_empty() {
            self.send(node, from, Message::TxResponse(Arc::new(TxResponse { txs })));
        }
    }

    fn defer(&mut self, node: usize, pending: Pending) {
        let queue = &mut self.nodes[node].pending;
        if queue.iter().any(|p| p.block_hash() == pending.block_hash()) {
            return;
        }
        if queue.len() == PENDING_CAPACITY {
            queue.pop_front();
        }
        queue.push_back(pending);
    }

    fn retry_pending(&mut self, node: usize) {
        // Accepting one block can unblock its children, so loop until stable.
        loop {
            let queued = std::mem::take(&mut self.nodes[node].pending);
            if queued.is_empty() {
                return;
            }
            let before = queued.len();
            let mut still = VecDeque::with_capacity(before);
            for p in queued {
                if self.nodes[node].state.chain.contains(&p.block_hash()) {
                    continue;
                }
                if let Progress::Deferred(p) = self.process(node, p) {
                    still.push_back(p);
                }
            }
            // Anything deferred while processing lands behind the retried entries.
            let added = std::mem::take(&mut self.nodes[node].pending);
            still.extend(added);
            while still.len() > PENDING_CAPACITY {
                still.pop_front();
            }
            let progressed = still.len() < before;
            self.nodes[node].pending = still;
            if !progressed {
                return;
            }
        }
    }

    fn process(&mut self, node: usize, pending: Pending) -> Progress {
        match pending {
            Pending::Seed { seed, from, requested } => {
                let n = &self.nodes[node];
                let block = match reconstruct_block(&seed, &n.state.registry, &n.store) {
                    Ok(block) => block,
                    Err(ReconstructError::NoMatchingAdvert) => {
                        return Progress::Deferred(Pending::Seed { seed, from, requested });
                    }
                    Err(ReconstructError::MissingTxs(hashes)) => {
                        if !requested {
                            self.send(node, from, Message::TxRequest(Arc::new(TxRequest { hashes })));
                        }
                        return Progress::Deferred(Pending::Seed { seed, from, requested: true });
                    }
                };
                let verdict =
                    validate_advertised(&block, seed.coinbase_address, &n.state.registry, &n.state.chain);
                match verdict {
                    ValidationVerdict::Ok => {
                        self.accept_block(node, Arc::new(block), Message::BlockSeed(seed), Some(from));
                        Progress::Done
                    }
                    ValidationVerdict::WrongPrevHash => {
                        Progress::Deferred(Pending::Seed { seed, from, requested })
                    }
                    other => {
                        self.reject(node, seed.block_hash(), other);
                        Progress::Done
                    }
                }
            }
            Pending::Full { block, from } => {
                match validate_full_block(&block, &self.nodes[node].state.chain) {
                    ValidationVerdict::Ok => {
                        self.accept_block(node, Arc::clone(&block), Message::FullBlock(block), Some(from));
                        Progress::Done
                    }
                    ValidationVerdict::WrongPrevHash => Progress::Deferred(Pending::Full { block, from }),
                    other => {
                        self.reject(node, block.hash(), other);
                        Progress::Done
                    }
                }
            }
        }
    }

    fn reject(&mut self, node: usize, block: Hash, verdict: ValidationVerdict) {
        self.log.push(LogRecord::BlockRejected {
            t: self.now,
            node: node as u32,
            block,
            reason: verdict.as_str().to_string(),
        });
    }

    fn accept_block(&mut self, node: usize, block: Arc<Block>, relay: Message, from: Option<usize>) {
        let hash = block.hash();
        let acceptance = self.nodes[node].state.on_block_accepted(block);
        if matches!(acceptance.outcome, AcceptOutcome::AlreadyKnown) {
            return;
        }
        let height = self.nodes[node].state.chain.height_of(&hash).expect("just accepted");
        self.log.push(LogRecord::BlockAccepted { t: self.now, node: node as u32, block: hash, height });
        self.flood(node, &relay, from);
        if let AcceptOutcome::NewTip(_) = acceptance.outcome {
            let chain = &self.nodes[node].state.chain;
            self.log.push(LogRecord::TipChanged {
                t: self.now,
                node: node as u32,
                tip: chain.tip(),
                height: chain.height(),
            });
            self.start_mining(node, acceptance.next_advert);
        }
    }

    fn broadcast_advert(&mut self, node: usize, advert: Advert) {
        let id = advert.id();
        let (prev, txs) = (advert.prev_block_hash, advert.tx_hashes.len() as u32);
        let msg = Message::Advert(Arc::new(advert.clone()));
        self.nodes[node].seen.insert(gossip_dedup_key(&msg));
        self.nodes[node].state.registry.register(advert);
        self.log.push(LogRecord::AdvertIssued { t: self.now, node: node as u32, prev, id, txs });
        self.flood(node, &msg, None);
    }

    fn start_mining(&mut self, node: usize, advert: Option<Advert>) {
        let n = &mut self.nodes[node];
        n.epoch += 1;
        n.job = None;
        if self.now >= self.mining_cutoff {
            if std::mem::take(&mut n.hashing) {
                self.log.push(LogRecord::MiningStopped { t: self.now, node: node as u32 });
            }
            return;
        }
        let epoch = n.epoch;
        let parent = n.state.chain.tip();
        let height = n.state.chain.height() + 1;
        let txs = match self.strategy {
            RelayStrategy::LateAdvert => None,
            _ => {
                let advert = advert.unwrap_or_else(|| n.state.next_advert());
                let txs: Vec<_> = advert
                    .tx_hashes
                    .iter()
                    .map(|h| Arc::clone(n.state.mempool.get(h).expect("advert drawn from mempool")))
                    .collect();
                if self.strategy == RelayStrategy::AdvertProtocol {
                    self.broadcast_advert(node, advert);
                }
                Some(txs)
            }
        };
        let n = &mut self.nodes[node];
        n.job = Some(MiningJob { epoch, txs });
        n.hashing = true;
        self.log.push(LogRecord::MiningStarted { t: self.now, node: node as u32, parent, height });
        let dt = sample_mining_time(n.rate, self.timing_target, &mut n.rng);
        let at = self.now + dt;
        if at <= self.horizon {
            self.schedule(at, node, EventKind::BlockFound { epoch });
        }
    }

    fn on_block_found(&mut self, node: usize, epoch: u64) {
        let n = &mut self.nodes[node];
        // Samples from before the last restart are void.
        if n.epoch != epoch || n.job.as_ref().is_none_or(|j| j.epoch != epoch) {
            return;
        }
        let job = n.job.take().expect("checked above");
        let txs = job.txs.unwrap_or_else(|| select_transactions(&n.state.mempool, &self.policy));
        let parent = n.state.chain.tip();
        let coinbase = CoinbaseTransaction::new(
            n.state.address,
            DEFAULT_BLOCK_REWARD,
            // A fresh extra nonce per round keeps blocks from repeated rounds on one parent distinct.
            epoch,
            self.policy.coinbase_size_bytes,
        )
        .expect("validated coinbase size");
        let template = BlockTemplate::with_size_cap(
            parent,
            coinbase,
            txs.iter().map(|tx| Transaction::clone(tx)).collect(),
            self.header_target,
            BLOCK_VERSION,
            GENESIS_TIME + self.now as u64,
            self.policy.max_block_size_bytes,
        )
        .expect("selection respects the size cap");
        let block = mine(&template, MiningBudget::new(u64::MAX).expect("positive"))
            .block
            .expect("header difficulty is small");
        let hash = block.hash();
        self.log.push(LogRecord::BlockFound {
            t: self.now,
            node: node as u32,
            block: hash,
            parent,
            height: n.state.chain.height() + 1,
            txs: block.transactions.len() as u32,
            size: block.wire_size(),
        });
        if self.strategy == RelayStrategy::LateAdvert {
            let advert = Advert {
                coinbase_address: block.coinbase_address(),
                tx_hashes: block.txids(),
                prev_block_hash: parent,
            };
            self.broadcast_advert(node, advert);
        }
        let block = Arc::new(block);
        let relay = match self.strategy {
            RelayStrategy::BaselineFullBlock => Message::FullBlock(Arc::clone(&block)),
            _ => Message::BlockSeed(Arc::new(BlockSeed::from_block(&block))),
        };
        self.nodes[node].seen.insert(dedup_key(relay.kind(), &hash));
        self.accept_block(node, block, relay, None);
    }
}
