#include "homechain/sim/world.hpp"

#include <algorithm>
#include <stdexcept>

#include "homechain/core/block.hpp"
#include "homechain/core/tx.hpp"

namespace homechain {

World::World(SimParams params, std::vector<WorkItem> workload,
             std::vector<AdversaryScript> scripts, std::uint64_t seed, std::uint64_t max_ticks,
             std::string scenario_name)
    : params_(std::move(params)),
      workload_(std::move(workload)),
      scripts_(std::move(scripts)),
      seed_(seed),
      max_ticks_(max_ticks),
      scenario_(std::move(scenario_name)),
      provider_(make_provider(params_.crypto)),
      root_rng_(seed),
      ids_(root_rng_.fork("ids")),
      topo_(params_),
      net_(loop_, topo_),
      world_rng_(root_rng_.fork("world")) {
    for (const Status& s : {validate_params(params_), validate_workload(params_, workload_),
                            validate_scripts(params_, scripts_)}) {
        if (!s.ok()) throw std::invalid_argument(std::string(to_string(s.why)) + ": " + s.detail);
    }
    build();
}

void World::build() {
    for (std::size_t c = 0; c < params_.clusters; ++c)
        chs_.push_back(std::make_unique<ChActor>(*this, c));

    std::size_t idx = 0;
    for (std::size_t c = 0; c < params_.clusters; ++c) {
        for (std::size_t h = 0; h < params_.homes_per_cluster; ++h, ++idx) {
            auto home = std::make_unique<HomeActor>(*this, idx, "home-" + std::to_string(idx), c);
            for (std::size_t d = 0; d < params_.devices_per_home; ++d)
                home->setup_device("dev" + std::to_string(d));
            homes_.push_back(std::move(home));
        }
    }
    idx = 0;
    for (std::size_t c = 0; c < params_.clusters; ++c)
        for (std::size_t s = 0; s < params_.sps_per_cluster; ++s, ++idx)
            sps_.push_back(std::make_unique<SpActor>(*this, idx, "sp-" + std::to_string(idx), c));

    cloud_ = std::make_unique<StorageActor>(*this, "cloud-0", StorageKind::cloud,
                                            params_.storage_hops, params_.storage_capacity);
    if (params_.shared_homes >= 2)
        shared_ = std::make_unique<StorageActor>(*this, "shared-0", StorageKind::shared,
                                                 params_.shared_hops, params_.storage_capacity);

    for (auto& h : homes_) h->bootstrap_cloud(*cloud_);
    if (shared_)
        for (std::size_t i = 0; i < homes_.size(); ++i)
            if (in_shared_group(i)) homes_[i]->bootstrap_shared(*shared_);

    // Requester grants declared by the workload, before any traffic moves.
    for (const WorkItem& item : workload_) {
        if (item.flow != "access" && item.flow != "monitor") continue;
        if (!item.grant) continue;
        const std::string dev = "dev" + std::to_string(item.device % params_.devices_per_home);
        if (item.random_placement) {
            for (auto& h : homes_)
                for (auto& s : sps_) h->grant_requester(s->pub(), dev);
        } else {
            home(item.home).grant_requester(sp(item.sp).pub(), dev);
        }
    }
    for (auto& h : homes_) {
        ChActor& ch = *chs_[h->cluster()];
        if (ch.alive()) h->redeclare(ch.ch());
    }

    // Preset peer trust between heads, as direct evidence both ways.
    if (params_.trust_level > 0.0 && chs_.size() > 1) {
        const EvidenceRecord ev = evidence_for_trust(params_.trust_level);
        for (auto& a : chs_) {
            if (!a->alive()) continue;
            for (auto& b : chs_) {
                if (a == b || !b->alive()) continue;
                const std::string& subject = b->ch().pub().id;
                for (std::uint64_t i = 0; i < ev.direct_pos; ++i)
                    a->ch().trust().update_evidence(subject, Outcome::pos, Channel::direct);
                for (std::uint64_t i = 0; i < ev.direct_neg; ++i)
                    a->ch().trust().update_evidence(subject, Outcome::neg, Channel::direct);
            }
        }
    }

    if (params_.blocks_per_chain > 0)
        for (auto& h : homes_)
            h->prefill(params_.blocks_per_chain, params_.txs_per_block, cloud_.get());
}

MetricsReport World::run() {
    if (ran_) throw std::logic_error("run() is single-shot");
    ran_ = true;
    schedule_workload();
    schedule_scripts();
    loop_.run(max_ticks_);
    return assemble();
}

HomeActor* World::home_by_name(const std::string& name) {
    for (auto& h : homes_)
        if (h->name() == name) return h.get();
    return nullptr;
}

void World::schedule_workload() {
    for (const WorkItem& item : workload_)
        for (std::size_t k = 0; k < item.repeat; ++k)
            loop_.at(item.tick + k * item.every, [this, item] { start_item(item); });
}

void World::schedule_scripts() {
    for (const AdversaryScript& s : scripts_)
        for (std::size_t k = 0; k < s.count; ++k)
            loop_.at(s.tick + k * s.every, [this, s] { start_script(s); });
}

void World::start_item(const WorkItem& item) {
    const std::size_t hi =
        item.random_placement ? world_rng_.bounded(homes_.size()) : item.home;
    HomeActor& h = home(hi);
    const std::string dev = "dev" + std::to_string(item.device % params_.devices_per_home);

    if (item.flow == "store") {
        FlowTrace& f = new_flow("store_" + item.target);
        h.start_store(f, dev, item.target);
    } else if (item.flow == "access") {
        const std::size_t si =
            item.random_placement ? world_rng_.bounded(sps_.size()) : item.sp;
        FlowTrace& f = new_flow("access");
        sp(si).start_access(f, h, dev, item.scope);
    } else if (item.flow == "monitor") {
        const std::size_t si =
            item.random_placement ? world_rng_.bounded(sps_.size()) : item.sp;
        FlowTrace& f = new_flow("monitor");
        sp(si).start_monitor(f, h, dev, item.monitor_ticks);
    } else if (item.flow == "breach_check") {
        FlowTrace& f = new_flow("breach_check");
        h.start_breach_check(f, dev);
    } else if (item.flow == "join") {
        FlowTrace& f = new_flow("join");
        start_join(f, h.cluster(), hi);
    } else if (item.flow == "change_cluster") {
        FlowTrace& f = new_flow("change_cluster");
        change_cluster(&f, hi, item.to_cluster);
    }
}

void World::start_script(const AdversaryScript& s) {
    if (s.kind == "dos_flood") {
        launch_dos(s);
    } else if (s.kind == "modification") {
        HomeActor& h = home(s.home);
        auto& d = h.device("dev" + std::to_string(s.device % params_.devices_per_home));
        if (!d.stored) {
            bump("modification_noop");
            return;
        }
        cloud_->node().mutate_for_attack(d.account, d.last_bn,
                                         world_rng_.bytes(params_.data_bytes));
        bump("modifications");
    } else if (s.kind == "dropping_ch") {
        ChActor& ch = *chs_[s.cluster % chs_.size()];
        if (ch.alive()) {
            ch.drop();
            bump("ch_drops");
        }
    } else if (s.kind == "mining_collusion") {
        chs_[s.cosigner_cluster % chs_.size()]->skip_verify = true;
        FlowTrace& f = new_flow("adversary");
        chs_[s.cluster % chs_.size()]->mine_forged(f, s.forged_txs, s.honest_txs,
                                                   s.cosigner_cluster % chs_.size());
    } else if (s.kind == "fake_sp_chain") {
        FlowTrace& f = new_flow("adversary");
        sp(s.sp).replay_grant_store(f, params_.data_bytes);
    } else if (s.kind == "rogue_device") {
        FlowTrace& f = new_flow("adversary");
        home(s.home).start_rogue_store(f, params_.data_bytes);
    }
}

void World::launch_dos(const AdversaryScript& s) {
    HomeActor& target = home(s.home);
    const std::string node = "adv-" + std::to_string(s.home % homes_.size());
    if (!topo_.has(node)) topo_.add_endpoint(node, target.cluster());

    KeyPair* kp = nullptr;
    if (s.rotate_pk) {
        adv_keys_[node + "/rotating"] = provider_->generate_keypair(world_rng_, "");
        kp = &adv_keys_[node + "/rotating"];
    } else {
        auto it = adv_keys_.find(node);
        if (it == adv_keys_.end())
            it = adv_keys_.emplace(node, provider_->generate_keypair(world_rng_, "")).first;
        kp = &it->second;
    }

    Transaction tx;
    tx.kind = TxKind::access;
    tx.device = "dev" + std::to_string(s.device % params_.devices_per_home);
    tx.scope = AccessScope::full_chain;
    tx.timestamp = loop_.now();
    tx.payload_refs.push_back(RandomId{world_rng_.token(128)});
    append_signature(*provider_, tx, kp->priv);

    FlowTrace& f = new_flow("adversary");
    auto ctx = std::make_shared<RequestCtx>();
    ctx->flow = &f;
    ctx->env = Envelope{OverlayMsgTag::multisig, target.name(), std::move(tx)};
    ctx->requester = kp->pub;
    ctx->requester_key = kp->priv;
    ctx->origin = node;
    ctx->scope = "full_chain";
    ctx->adversary = true;

    ChActor& ingress = *chs_[target.cluster()];
    if (!ingress.alive()) {
        finish_flow(f, "rejected(no-head)");
        return;
    }
    const std::size_t bytes = encode_envelope(ctx->env).size();
    net_.send(f, node, ingress.node(), "access_request", bytes,
              [ing = &ingress, ctx] { ing->ingest_multisig(ctx, {}); });
    bump("dos_requests");
}

FlowTrace& World::new_flow(const std::string& kind) {
    FlowTrace f;
    f.kind = kind;
    f.id = kind + "#" + std::to_string(flow_seq_[kind]++);
    f.start = loop_.now();
    f.end = loop_.now();
    f.progress_tick = loop_.now();
    flows_.push_back(std::move(f));
    return flows_.back();
}

void World::finish_flow(FlowTrace& flow, std::string outcome) {
    if (flow.done()) return;  // the first verdict stands
    flow.outcome = std::move(outcome);
    flow.end = loop_.now();
}

void World::bump(const std::string& counter, std::uint64_t by) { counters_[counter] += by; }

std::vector<std::size_t> World::pick_clusters(std::size_t k) {
    std::vector<std::size_t> alive;
    for (std::size_t c = 0; c < chs_.size(); ++c)
        if (chs_[c]->alive()) alive.push_back(c);
    const auto picks = world_rng_.sample_indices(alive.size(), std::min(k, alive.size()));
    std::vector<std::size_t> out;
    out.reserve(picks.size());
    for (const std::size_t i : picks) out.push_back(alive[i]);
    return out;
}

void World::arm_starvation_watchdog(std::shared_ptr<RequestCtx> ctx, std::size_t ingress,
                                    std::uint64_t expected_arrival, std::function<void()> retry) {
    if (ctx->adversary) return;
    const std::uint64_t armed = loop_.now();
    loop_.at(expected_arrival + params_.starvation_ticks,
             [this, ctx, ingress, expected_arrival, armed, retry = std::move(retry)] {
                 if (ctx->flow->done()) return;
                 if (ctx->flow->progress_tick > expected_arrival) return;  // moving, not starved
                 bump("starvation_fired");
                 ChActor& ch = *chs_[ingress % chs_.size()];
                 // A head elected after arming already answered the problem.
                 if (ch.elected_tick() <= armed) reelect(ingress);
                 retry();
             });
}

void World::reelect(std::size_t cluster) {
    ChActor& a = *chs_[cluster % chs_.size()];
    if (!a.node_.empty()) a.accused_.insert(a.node_);
    if (!a.elect()) {
        bump("reelection_failed");
        return;
    }
    bump("reelections");
    counters_["reelection_tick"] = loop_.now();
    for (auto& h : homes_)
        if (h->cluster() == a.cluster()) h->redeclare(a.ch());
}

void World::flood_multisig(std::shared_ptr<RequestCtx> ctx, std::size_t from,
                           std::vector<std::size_t> path) {
    ChActor& origin = *chs_[from % chs_.size()];
    const std::size_t bytes = encode_envelope(ctx->env).size();
    if (params_.ch_topology == "mesh") {
        if (path.size() > 1) return;  // one flood, from the ingress head
        for (std::size_t c = 0; c < chs_.size(); ++c) {
            if (c == from || !chs_[c]->alive()) continue;
            net_.send(*ctx->flow, origin.node(), chs_[c]->node(), "multisig_forward", bytes,
                      [ch = chs_[c].get(), ctx, path] { ch->ingest_multisig(ctx, path); });
        }
        return;
    }
    for (const long d : {-1L, 1L}) {
        const long t = static_cast<long>(from) + d;
        if (t < 0 || t >= static_cast<long>(chs_.size())) continue;
        const auto tu = static_cast<std::size_t>(t);
        if (std::find(path.begin(), path.end(), tu) != path.end()) continue;
        if (!chs_[tu]->alive()) continue;
        net_.send(*ctx->flow, origin.node(), chs_[tu]->node(), "multisig_forward", bytes,
                  [ch = chs_[tu].get(), ctx, path] { ch->ingest_multisig(ctx, path); });
    }
}

void World::start_join(FlowTrace& flow, std::size_t cluster, std::size_t home_index) {
    const std::string joiner = "join-" + std::to_string(join_seq_++);
    topo_.add_endpoint(joiner, cluster % chs_.size());
    home(home_index).serve_join(flow, joiner);
}

void World::change_cluster(FlowTrace* flow, std::size_t home_index, std::size_t to_cluster) {
    HomeActor& h = home(home_index);
    const std::size_t from = h.cluster();
    const std::size_t to = to_cluster % chs_.size();
    if (from == to) {
        if (flow != nullptr) finish_flow(*flow, "ok");
        return;
    }
    ChActor& old_ch = *chs_[from];
    ChActor& new_ch = *chs_[to];
    if (old_ch.alive()) old_ch.ch().remove_member(h.name());
    topo_.move_endpoint(h.name(), to);
    h.set_cluster(to);
    if (new_ch.alive()) h.redeclare(new_ch.ch());
    bump("cluster_moves");
    if (flow != nullptr) {
        if (!new_ch.alive()) {
            finish_flow(*flow, "rejected(no-head)");
            return;
        }
        net_.send(*flow, h.name(), new_ch.node(), "join_cluster", 96,
                  [this, flow] { finish_flow(*flow, "ok"); });
    }
}

void World::maybe_auto_move(HomeActor& h) {
    if (!params_.auto_move) return;
    if (h.last_flow_delay_per_hop() <= params_.move_delay_hops * params_.link_delay) return;
    std::size_t best = h.cluster();
    std::uint64_t best_delay = topo_.cluster_delay(h.cluster());
    for (std::size_t c = 0; c < chs_.size(); ++c) {
        if (!chs_[c]->alive()) continue;
        const std::uint64_t d = topo_.cluster_delay(c);
        if (d < best_delay) {
            best = c;
            best_delay = d;
        }
    }
    if (best == h.cluster()) return;
    bump("auto_moves");
    change_cluster(nullptr, h.index(), best);
}

std::uint64_t World::local_blocks_total() const {
    std::uint64_t n = 0;
    for (const auto& h : homes_) n += h->miner().chain().blocks.size();
    return n;
}

std::uint64_t World::overlay_blocks_total() const {
    std::uint64_t n = 0;
    for (const auto& c : chs_) n += c->blocks_mined();
    return n;
}

std::uint64_t World::memory_bytes_total() const {
    std::uint64_t bytes = 0;
    for (const auto& h : homes_)
        for (const Block& b : h->miner().chain().blocks) bytes += block_mem_units(b);
    return bytes;
}

std::uint64_t World::mean_block_size() const {
    const std::uint64_t blocks = local_blocks_total();
    return blocks == 0 ? 0 : memory_bytes_total() / blocks;
}

MetricsReport World::assemble() {
    MetricsReport r;
    r.scenario = scenario_;
    r.seed = seed_;
    r.params.N = params_.clusters;
    r.params.S = params_.storage_hops;
    r.params.B = params_.blocks_per_chain;
    r.params.T = params_.txs_per_block;
    r.params.BS = mean_block_size();
    r.params.TL = params_.trust_level;
    r.total_packets = net_.total_packets();
    r.memory_bytes = memory_bytes_total();
    r.local_blocks = local_blocks_total();
    r.overlay_blocks = overlay_blocks_total();
    const std::uint64_t mem_blocks = r.local_blocks + r.overlay_blocks;

    std::vector<std::string> kinds = {"store_cloud", "store_shared", "store_local",
                                      "access",      "monitor",      "breach_check",
                                      "join",        "change_cluster", "mining",
                                      "adversary"};
    for (const FlowTrace& f : flows_)
        if (std::find(kinds.begin(), kinds.end(), f.kind) == kinds.end()) kinds.push_back(f.kind);

    MetricsReport::Row all;
    all.flow = "all";
    all.mem_blocks = mem_blocks;
    for (const std::string& k : kinds) {
        MetricsReport::Row row;
        row.flow = k;
        bool seen = false;
        for (const FlowTrace& f : flows_) {
            if (f.kind != k) continue;
            seen = true;
            row.packets += f.packets;
            row.comp_ops += f.comp_ops;
            if (f.done() && f.end >= f.start) row.delay += f.end - f.start;
            if (f.outcome == "ok")
                ++row.ok;
            else if (f.outcome == "denied")
                ++row.denied;
            else if (f.outcome == "incomplete")
                ++row.incomplete;
            else
                ++row.rejected;
        }
        if (!seen) continue;
        row.mem_blocks = mem_blocks;
        all.packets += row.packets;
        all.delay += row.delay;
        all.comp_ops += row.comp_ops;
        all.ok += row.ok;
        all.denied += row.denied;
        all.rejected += row.rejected;
        all.incomplete += row.incomplete;
        r.rows.push_back(std::move(row));
    }
    r.rows.push_back(std::move(all));
    for (const auto& [k, v] : counters_) r.counters.emplace_back(k, v);
    return r;
}

}  // namespace homechain
