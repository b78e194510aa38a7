#include "hpim/netsim.hpp"

#include <algorithm>
#include <sstream>

#include "hpim/checker.hpp"
#include "hpim/oracle.hpp"
#include "json.hpp"

namespace hpim {

using Json = nlohmann::ordered_json;

namespace {

constexpr int kDataTtl = 32;

int need_router(const Topology& t, const std::string& n) {
    int r = t.router_index(n);
    if (r < 0) throw ScenarioInvalid("unknown router " + n);
    return r;
}

int need_iface(const Topology& t, int r, const std::string& n) {
    int i = t.iface_id(r, n);
    if (!i) throw ScenarioInvalid("unknown interface " + n + " on " + t.routers[r].name);
    return i;
}

int need_link(const Topology& t, const std::string& n) {
    int l = t.link_index(n);
    if (l < 0) throw ScenarioInvalid("unknown link " + n);
    return l;
}

int need_host(const Topology& t, const std::string& n) {
    int h = t.receiver_index(n);
    if (h < 0) throw ScenarioInvalid("unknown receiver " + n);
    return h;
}

int need_source(const Topology& t, const std::string& n) {
    int s = t.source_index(n);
    if (s >= 0) return s;
    if (auto ip = parse_ip(n))
        for (std::size_t k = 0; k < t.sources.size(); ++k)
            if (t.sources[k].ip == *ip) return static_cast<int>(k);
    throw ScenarioInvalid("unknown source " + n);
}

Ipv4 need_group(const std::string& g) {
    auto ip = parse_ip(g);
    if (!ip || !is_multicast(*ip)) throw ScenarioInvalid("bad group " + g);
    return *ip;
}

MsgType need_type(const std::string& s) {
    auto t = parse_msg_type(s);
    if (!t) throw ScenarioInvalid("unknown message type " + s);
    return *t;
}

void need_args(const ScenarioAction& a, std::size_t lo, std::size_t hi) {
    if (a.args.size() < lo || a.args.size() > hi)
        throw ScenarioInvalid(a.verb + ": wrong number of arguments");
}

// Interface of router `r` on the same link as interface `iface` of router `from`.
int iface_on_link(const Topology& t, int r, int link) {
    for (auto& i : t.routers[r].ifaces)
        if (i.link == link) return i.id;
    return 0;
}

}  // namespace

Simulator::Simulator(Topology topo, SimOptions opt) : topo_(std::move(topo)), opt_(opt), rng_(opt.seed) {
    const std::size_t n = topo_.routers.size();
    alive_.assign(n, true);
    wake_gen_.assign(n, 0);
    wake_at_.assign(n, kNever);
    notified_.assign(n, std::vector<std::optional<Route>>(topo_.sources.size()));
    routers_.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        RouterConfig c = topo_.router_config(static_cast<int>(r));
        c.tracing = opt_.trace;
        routers_.emplace_back(c);
        routers_.back().boot(0);
    }
    recompute_routes();
    for (std::size_t r = 0; r < n; ++r) reschedule_wake(static_cast<int>(r));
}

void Simulator::push(SimTime t, Payload p) { queue_.push(Event{t, seq_++, std::move(p)}); }

void Simulator::record(const std::string& line) {
    if (opt_.trace) trace_.push_back(line);
}

LinkModel Simulator::model_of(int link) const {
    return opt_.link_override ? *opt_.link_override : topo_.links[link].model;
}

void Simulator::load(const Scenario& s) {
    for (auto& a : s.actions) {
        try {
            validate_action(a);
        } catch (const ScenarioInvalid& e) {
            throw ScenarioInvalid(s.origin + ":" + std::to_string(a.line) + ": " + e.what());
        }
        actions_.push_back(a);
        push(a.time, EvAction{actions_.size() - 1});
    }
}

bool Simulator::step() {
    if (queue_.empty()) return false;
    Event e = queue_.top();
    queue_.pop();
    now_ = std::max(now_, e.time);
    handle(e);
    return true;
}

void Simulator::run_until(SimTime t) {
    while (!queue_.empty() && queue_.top().time <= t) step();
    now_ = std::max(now_, t);
}

bool Simulator::run_until_quiescent(SimTime limit) {
    while (!quiescent()) {
        if (queue_.empty() || queue_.top().time > limit) return false;
        step();
    }
    return true;
}

bool Simulator::quiescent() const {
    if (control_in_flight_ > 0 || routes_in_flight_ > 0) return false;
    for (auto& [k, q] : channels_)
        if (!q.empty()) return false;
    for (std::size_t r = 0; r < routers_.size(); ++r)
        if (alive_[r] && routers_[r].busy()) return false;
    return true;
}

void Simulator::handle(const Event& e) {
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, EvWake>) {
                if (!alive(p.router) || p.gen != wake_gen_[p.router]) return;
                wake_at_[p.router] = kNever;
                deliver_to(p.router, TimerFire{});
            } else if constexpr (std::is_same_v<T, EvFrame>) {
                if (p.control) --control_in_flight_;
                const auto& ti = topo_.iface(p.router, p.frame.iface);
                if (!alive(p.router) || !ti.up || !topo_.links[ti.link].up) return;
                deliver_to(p.router, p.frame);
            } else if constexpr (std::is_same_v<T, EvRoute>) {
                --routes_in_flight_;
                deliver_to(p.router, p.update);
            } else if constexpr (std::is_same_v<T, EvData>) {
                const auto& ti = topo_.iface(p.router, p.data.iface);
                if (!alive(p.router) || !ti.up || !topo_.links[ti.link].up) return;
                deliver_to(p.router, p.data, p.ttl);
            } else if constexpr (std::is_same_v<T, EvSourceTick>) {
                auto it = source_gen_.find({p.source, p.group});
                if (it == source_gen_.end() || it->second.first != p.gen) return;
                send_data(p.source, p.group);
                push(now_ + it->second.second, EvSourceTick{p.source, p.group, p.gen});
            } else if constexpr (std::is_same_v<T, EvAction>) {
                run_action(actions_[p.index]);
            }
        },
        e.payload);
}

void Simulator::deliver_to(int r, const RouterEvent& ev, int ttl) {
    if (!alive(r)) return;
    RouterOutput out = routers_[r].dispatch(ev, now_);
    process_output(r, out, ev, ttl);
    reschedule_wake(r);
}

void Simulator::reschedule_wake(int r) {
    if (!alive(r)) return;
    SimTime d = routers_[r].next_deadline();
    if (d == kNever || d == wake_at_[r]) return;
    wake_at_[r] = d;
    push(std::max(d, now_), EvWake{r, ++wake_gen_[r]});
}

void Simulator::process_output(int r, RouterOutput& out, const RouterEvent& ev, int ttl) {
    for (auto& tr : out.trace) {
        if (tr.kind == "rx_stale") ++stale_;
        if (!opt_.trace) continue;
        Json j;
        j["t"] = now_;
        j["ev"] = "router";
        j["router"] = topo_.routers[r].name;
        j["kind"] = tr.kind;
        for (auto& [k, v] : tr.fields) j[k] = v;
        record(j.dump());
    }
    for (auto& f : out.frames) transmit(r, f, false);
    const auto* data = std::get_if<DataIn>(&ev);
    if (!data || !out.data_out || channel_mode_) return;
    if (opt_.trace && opt_.trace_data) {
        Json j;
        j["t"] = now_;
        j["ev"] = "data";
        j["router"] = topo_.routers[r].name;
        j["iface"] = topo_.iface(r, data->iface).name;
        j["tree"] = to_string(data->tree);
        std::vector<std::string> names;
        for (int id : *out.data_out) names.push_back(topo_.iface(r, id).name);
        j["out"] = names;
        record(j.dump());
    }
    for (int id : *out.data_out) emit_data(topo_.iface(r, id).link, data->tree, ttl - 1, r);
}

void Simulator::transmit(int r, const OutFrame& f, bool replay) {
    const int link = topo_.iface(r, f.iface).link;
    std::uint64_t id = ++frame_id_;
    if (opt_.frame_log) {
        FrameRecord rec;
        rec.id = id;
        rec.time = now_;
        rec.router = r;
        rec.iface = f.iface;
        rec.link = link;
        rec.src = f.src;
        rec.dst = f.dst;
        rec.type = f.type;
        rec.tree = f.tree;
        rec.bytes = f.bytes;
        rec.retransmission = f.retransmission;
        rec.replay = replay;
        frames_.push_back(std::move(rec));
    }
    if (opt_.trace) {
        Json j;
        j["t"] = now_;
        j["ev"] = replay ? "replay" : "tx";
        j["frame"] = id;
        j["router"] = topo_.routers[r].name;
        j["iface"] = topo_.iface(r, f.iface).name;
        j["type"] = to_string(f.type);
        j["dst"] = ip_to_string(f.dst);
        if (f.tree) j["tree"] = to_string(*f.tree);
        if (f.retransmission) j["retx"] = true;
        record(j.dump());
    }
    if (!topo_.links[link].up) return;
    FrameIn in{0, f.src, f.dst, f.bytes};
    for (auto& a : topo_.links[link].attached) {
        if (a.router == r && a.iface == f.iface) continue;
        const auto& ti = topo_.iface(a.router, a.iface);
        if (!alive(a.router) || !ti.up) continue;
        if (!is_multicast(f.dst) && f.dst != ti.ip) continue;
        in.iface = a.iface;
        send_frame_to(r, link, a, in, f.type != MsgType::Hello, replay);
    }
}

void Simulator::send_frame_to(int from, int link, const Attachment& a, const FrameIn& f, bool control, bool replay) {
    if (channel_mode_) {
        channels_[{from, a.router}].push_back({a.router, f, control, false});
        return;
    }
    LinkModel m = replay ? LinkModel{} : model_of(link);
    if (m.loss > 0 && std::uniform_real_distribution<double>(0, 1)(rng_) < m.loss) {
        if (opt_.trace) {
            Json j;
            j["t"] = now_;
            j["ev"] = "drop";
            j["router"] = topo_.routers[a.router].name;
            j["iface"] = topo_.iface(a.router, a.iface).name;
            j["from"] = ip_to_string(f.src);
            j["reason"] = "loss";
            record(j.dump());
        }
        return;
    }
    int copies = 1;
    if (m.duplicate > 0 && std::uniform_real_distribution<double>(0, 1)(rng_) < m.duplicate) copies = 2;
    for (int c = 0; c < copies; ++c) {
        SimTime d = m.delay + c;
        if (m.reorder && m.jitter > 0) d += std::uniform_int_distribution<SimTime>(0, m.jitter)(rng_);
        if (control) ++control_in_flight_;
        push(now_ + d, EvFrame{a.router, f, control});
    }
}

void Simulator::emit_data(int link, const TreeRef& t, int ttl, int except_router) {
    if (!topo_.links[link].up || ttl <= 0) return;
    SimTime d = model_of(link).delay;
    for (std::size_t h = 0; h < topo_.receivers.size(); ++h)
        if (topo_.receivers[h].link == link) host_rx_[{static_cast<int>(h), t}] = now_ + d;
    for (auto& a : topo_.links[link].attached) {
        if (a.router == except_router) continue;
        if (!alive(a.router) || !topo_.iface(a.router, a.iface).up) continue;
        push(now_ + d, EvData{a.router, DataIn{a.iface, t}, ttl});
    }
}

void Simulator::recompute_routes() {
    for (std::size_t s = 0; s < topo_.sources.size(); ++s) {
        auto routes = compute_routes(topo_, static_cast<int>(s));
        for (std::size_t r = 0; r < routers_.size(); ++r) {
            if (!alive_[r]) continue;
            auto& last = notified_[r][s];
            if (last && *last == routes[r]) continue;
            last = routes[r];
            RouteUpdate u{topo_.sources[s].ip, routes[r]};
            ++routes_in_flight_;
            if (channel_mode_)
                channels_[{-1, static_cast<int>(r)}].push_back({static_cast<int>(r), u, false, true});
            else
                push(now_ + topo_.routers[r].route_delay, EvRoute{static_cast<int>(r), u});
        }
    }
}

std::vector<std::pair<int, int>> Simulator::ready_channels() const {
    std::vector<std::pair<int, int>> out;
    for (auto& [k, q] : channels_)
        if (!q.empty()) out.push_back(k);
    return out;
}

void Simulator::deliver_channel(const std::pair<int, int>& key) {
    auto& q = channels_[key];
    if (q.empty()) return;
    ChannelItem item = std::move(q.front());
    q.pop_front();
    now_ += 1;
    if (item.route) --routes_in_flight_;
    if (auto* f = std::get_if<FrameIn>(&item.ev)) {
        const auto& ti = topo_.iface(item.router, f->iface);
        if (!ti.up || !topo_.links[ti.link].up) return;
    }
    deliver_to(item.router, item.ev);
}

void Simulator::fail_router_detected(int r) {
    fail_router(r);
    for (auto& [k, q] : channels_)
        if (k.first == r || k.second == r) q.clear();
    for (auto& ri : topo_.routers[r].ifaces) {
        if (!topo_.links[ri.link].up) continue;
        for (auto& a : topo_.links[ri.link].attached) {
            if (a.router == r || !alive(a.router) || !topo_.iface(a.router, a.iface).up) continue;
            channels_[{-2, a.router}].push_back({a.router, NeighborDown{a.iface, ri.ip}, false, false});
        }
    }
}

// ---------------------------------------------------------------------------
// Actions

void Simulator::start_source(int s, Ipv4 group, SimTime period) {
    auto key = std::make_pair(s, group);
    started_.insert(key);
    std::uint64_t gen = ++source_epoch_;
    source_gen_[key] = {gen, period};
    send_data(s, group);
    if (period > 0) push(now_ + period, EvSourceTick{s, group, gen});
}

void Simulator::stop_source(int s, Ipv4 group) { source_gen_.erase({s, group}); }

void Simulator::send_data(int s, Ipv4 group) {
    started_.insert({s, group});
    const auto& src = topo_.sources[s];
    TreeRef t{src.ip, group};
    if (opt_.trace) {
        Json j;
        j["t"] = now_;
        j["ev"] = "source_data";
        j["source"] = src.name;
        j["tree"] = to_string(t);
        record(j.dump());
    }
    if (channel_mode_) {
        for (auto& a : topo_.links[src.link].attached)
            if (alive(a.router) && topo_.iface(a.router, a.iface).up) deliver_to(a.router, DataIn{a.iface, t});
        return;
    }
    emit_data(src.link, t, kDataTtl, -1);
}

void Simulator::fail_router(int r) {
    if (!alive(r)) return;
    alive_[r] = false;
    topo_.routers[r].up = false;
    ++wake_gen_[r];
    wake_at_[r] = kNever;
    if (opt_.trace) record(Json{{"t", now_}, {"ev", "fail_router"}, {"router", topo_.routers[r].name}}.dump());
    recompute_routes();
}

void Simulator::recover_router(int r) {
    if (alive(r)) return;
    RouterConfig c = topo_.router_config(r);
    c.tracing = opt_.trace;
    routers_[r] = Router(c);
    routers_[r].boot(now_);
    alive_[r] = true;
    topo_.routers[r].up = true;
    for (auto& n : notified_[r]) n.reset();
    if (opt_.trace) record(Json{{"t", now_}, {"ev", "recover_router"}, {"router", topo_.routers[r].name}}.dump());
    for (auto& i : topo_.routers[r].ifaces)
        if (!topo_.links[i.link].up || !i.up) deliver_to(r, InterfaceChange{i.id, InterfaceChange::Kind::Down});
    recompute_routes();
    for (auto& [key, hosts] : member_hosts_) {
        if (hosts.empty()) continue;
        for (auto& i : topo_.routers[r].ifaces)
            if (i.link == key.first) deliver_to(r, MembershipChange{i.id, key.second, true});
    }
    reschedule_wake(r);
}

void Simulator::fail_link(int l) {
    auto& link = topo_.links[l];
    if (!link.up) return;
    link.up = false;
    if (opt_.trace) record(Json{{"t", now_}, {"ev", "fail_link"}, {"link", link.name}}.dump());
    for (auto& a : link.attached)
        if (alive(a.router)) deliver_to(a.router, InterfaceChange{a.iface, InterfaceChange::Kind::Down});
    recompute_routes();
}

void Simulator::recover_link(int l) {
    auto& link = topo_.links[l];
    if (link.up) return;
    link.up = true;
    if (opt_.trace) record(Json{{"t", now_}, {"ev", "recover_link"}, {"link", link.name}}.dump());
    for (auto& a : link.attached)
        if (alive(a.router)) deliver_to(a.router, InterfaceChange{a.iface, InterfaceChange::Kind::Up});
    recompute_routes();
}

void Simulator::set_cost(int r, int iface, std::uint32_t cost) {
    topo_.iface(r, iface).cost = cost;
    if (opt_.trace)
        record(Json{{"t", now_}, {"ev", "set_cost"}, {"router", topo_.routers[r].name},
                    {"iface", topo_.iface(r, iface).name}, {"cost", cost}}
                   .dump());
    recompute_routes();
}

bool Simulator::members(int link, Ipv4 group) const {
    auto it = member_hosts_.find({link, group});
    return it != member_hosts_.end() && !it->second.empty();
}

void Simulator::host_join(int h, Ipv4 group) {
    int link = topo_.receivers[h].link;
    bool had = members(link, group);
    member_hosts_[{link, group}].insert(h);
    if (had) return;
    for (auto& a : topo_.links[link].attached) deliver_to(a.router, MembershipChange{a.iface, group, true});
}

void Simulator::host_leave(int h, Ipv4 group) {
    int link = topo_.receivers[h].link;
    if (!members(link, group)) return;
    member_hosts_[{link, group}].erase(h);
    if (members(link, group)) return;
    for (auto& a : topo_.links[link].attached) deliver_to(a.router, MembershipChange{a.iface, group, false});
}

void Simulator::reboot_interface(int r, int iface) {
    if (opt_.trace)
        record(Json{{"t", now_}, {"ev", "reboot_interface"}, {"router", topo_.routers[r].name},
                    {"iface", topo_.iface(r, iface).name}}
                   .dump());
    deliver_to(r, InterfaceChange{iface, InterfaceChange::Kind::Reboot});
}

void Simulator::set_link_model(int l, const LinkModel& m) { topo_.links[l].model = m; }

void Simulator::inject(const FrameRecord& f) {
    OutFrame o;
    o.iface = f.iface;
    o.src = f.src;
    o.dst = f.dst;
    o.type = f.type;
    o.tree = f.tree;
    o.bytes = f.bytes;
    transmit(f.router, o, true);
}

std::optional<SimTime> Simulator::last_delivery(int host, const TreeRef& t) const {
    auto it = host_rx_.find({host, t});
    if (it == host_rx_.end()) return std::nullopt;
    return it->second;
}

std::string Simulator::digest(bool include_sequence) const {
    std::string out;
    for (std::size_t r = 0; r < routers_.size(); ++r) {
        if (!alive_[r])
            out += "router " + topo_.routers[r].name + " down\n";
        else
            out += routers_[r].digest(include_sequence);
    }
    return out;
}

void Simulator::trace_final_digests() {
    for (std::size_t r = 0; r < routers_.size(); ++r) {
        std::string text = alive_[r] ? routers_[r].digest(true) : "router " + topo_.routers[r].name + " down\n";
        record(Json{{"t", now_}, {"ev", "digest"}, {"router", topo_.routers[r].name}, {"text", text}}.dump());
    }
}

// ---------------------------------------------------------------------------
// Scenario actions

void Simulator::validate_action(const ScenarioAction& a) const {
    const auto& t = topo_;
    const auto& v = a.verb;
    const auto& w = a.args;
    if (v == "start_source") {
        need_args(a, 2, 4);
        need_source(t, w[0]);
        need_group(w[1]);
        if (w.size() == 4) {
            if (w[2] != "period") throw ScenarioInvalid("start_source: expected 'period'");
            parse_time(w[3]);
        } else if (w.size() == 3) {
            throw ScenarioInvalid("start_source: expected 'period <t>'");
        }
    } else if (v == "stop_source" || v == "send_data") {
        need_args(a, 2, 2);
        need_source(t, w[0]);
        need_group(w[1]);
    } else if (v == "fail_router" || v == "recover_router") {
        need_args(a, 1, 1);
        need_router(t, w[0]);
    } else if (v == "fail_link" || v == "recover_link") {
        need_args(a, 1, 1);
        need_link(t, w[0]);
    } else if (v == "set_cost") {
        need_args(a, 3, 3);
        need_iface(t, need_router(t, w[0]), w[1]);
        if (std::stoll(w[2]) < 1) throw ScenarioInvalid("cost must be >= 1");
    } else if (v == "host_join" || v == "host_leave") {
        need_args(a, 2, 2);
        need_host(t, w[0]);
        need_group(w[1]);
    } else if (v == "reboot_interface") {
        need_args(a, 2, 2);
        need_iface(t, need_router(t, w[0]), w[1]);
    } else if (v == "set_link_model") {
        need_args(a, 1, 64);
        if (w[0] != "*") need_link(t, w[0]);
        LinkModel m;
        std::vector<std::string> full{"x"};
        full.insert(full.end(), w.begin(), w.end());
        parse_linkmodel_args(m, full, 2);
    } else if (v == "capture") {
        need_args(a, 3, 4);
        need_router(t, w[1]);
        need_type(w[2]);
        if (w.size() == 4 && w[3] != "first" && w[3] != "last" && std::stoll(w[3]) < 1)
            throw ScenarioInvalid("capture: index must be first, last or >= 1");
    } else if (v == "replay") {
        need_args(a, 1, 1);
    } else if (v == "assert_digest") {
        need_args(a, 2, 3);
        if (w[0] != "save" && w[0] != "equal") throw ScenarioInvalid("assert_digest save|equal <name>");
        if (w.size() == 3 && w[2] != "noseq") throw ScenarioInvalid("assert_digest: unknown flag " + w[2]);
    } else if (v == "assert_invariants") {
        need_args(a, 0, 0);
    } else if (v == "assert_state") {
        if (w.empty()) throw ScenarioInvalid("assert_state needs a kind");
        const auto& k = w[0];
        auto tree_args = [&](std::size_t at) {
            need_source(t, w[at]);
            need_group(w[at + 1]);
        };
        if (k == "tree" || k == "parent" || k == "root" || k == "rpc" || k == "interested") {
            need_args(a, 5, 5);
            int r = need_router(t, w[1]);
            tree_args(2);
            if (k == "tree" && !parse_tree_state(w[4])) throw ScenarioInvalid("bad tree state " + w[4]);
            if (k == "parent" && w[4] != "-") need_router(t, w[4]);
            if (k == "root" && w[4] != "-") need_iface(t, r, w[4]);
        } else if (k == "assert" || k == "fwd" || k == "di") {
            need_args(a, 6, 6);
            need_iface(t, need_router(t, w[1]), w[2]);
            tree_args(3);
        } else if (k == "neighbor") {
            need_args(a, 5, 5);
            need_iface(t, need_router(t, w[1]), w[2]);
            need_router(t, w[3]);
        } else if (k == "upstream") {
            need_args(a, 7, 7);
            need_iface(t, need_router(t, w[1]), w[2]);
            need_router(t, w[3]);
            tree_args(4);
        } else if (k == "aw") {
            need_args(a, 5, 5);
            need_link(t, w[1]);
            tree_args(2);
            if (w[4] != "-") need_router(t, w[4]);
        } else if (k == "receiving") {
            need_args(a, 5, 5);
            need_host(t, w[1]);
            tree_args(2);
        } else {
            throw ScenarioInvalid("unknown assert_state kind " + k);
        }
    } else {
        throw ScenarioInvalid("unknown action " + v);
    }
}

void Simulator::fail(const ScenarioAction& a, const std::string& msg) {
    failures_.push_back({now_, a.line, msg});
    if (opt_.trace)
        record(Json{{"t", now_}, {"ev", "assert_failed"}, {"line", a.line}, {"message", msg}}.dump());
}

void Simulator::run_action(const ScenarioAction& a) {
    const auto& w = a.args;
    if (opt_.trace) {
        Json j;
        j["t"] = now_;
        j["ev"] = "action";
        j["line"] = a.line;
        j["verb"] = a.verb;
        j["args"] = w;
        record(j.dump());
    }
    const auto& v = a.verb;
    if (v == "start_source") {
        SimTime period = w.size() == 4 ? parse_time(w[3]) : kSecond;
        start_source(need_source(topo_, w[0]), need_group(w[1]), period);
    } else if (v == "stop_source") {
        stop_source(need_source(topo_, w[0]), need_group(w[1]));
    } else if (v == "send_data") {
        send_data(need_source(topo_, w[0]), need_group(w[1]));
    } else if (v == "fail_router") {
        fail_router(need_router(topo_, w[0]));
    } else if (v == "recover_router") {
        recover_router(need_router(topo_, w[0]));
    } else if (v == "fail_link") {
        fail_link(need_link(topo_, w[0]));
    } else if (v == "recover_link") {
        recover_link(need_link(topo_, w[0]));
    } else if (v == "set_cost") {
        int r = need_router(topo_, w[0]);
        set_cost(r, need_iface(topo_, r, w[1]), static_cast<std::uint32_t>(std::stoul(w[2])));
    } else if (v == "host_join") {
        host_join(need_host(topo_, w[0]), need_group(w[1]));
    } else if (v == "host_leave") {
        host_leave(need_host(topo_, w[0]), need_group(w[1]));
    } else if (v == "reboot_interface") {
        int r = need_router(topo_, w[0]);
        reboot_interface(r, need_iface(topo_, r, w[1]));
    } else if (v == "set_link_model") {
        std::vector<std::string> full{"x"};
        full.insert(full.end(), w.begin(), w.end());
        if (w[0] == "*") {
            for (auto& l : topo_.links) parse_linkmodel_args(l.model, full, 2);
        } else {
            parse_linkmodel_args(topo_.links[need_link(topo_, w[0])].model, full, 2);
        }
    } else if (v == "capture") {
        int r = need_router(topo_, w[1]);
        MsgType type = need_type(w[2]);
        std::string which = w.size() == 4 ? w[3] : "last";
        std::vector<const FrameRecord*> hits;
        for (auto& f : frames_)
            if (f.router == r && f.type == type && !f.replay) hits.push_back(&f);
        const FrameRecord* pick = nullptr;
        if (!hits.empty()) {
            if (which == "first") pick = hits.front();
            else if (which == "last") pick = hits.back();
            else {
                auto n = std::stoul(which);
                if (n <= hits.size()) pick = hits[n - 1];
            }
        }
        if (!pick) return fail(a, "capture: no " + w[2] + " frame from " + w[1]);
        captures_[w[0]] = *pick;
    } else if (v == "replay") {
        auto it = captures_.find(w[0]);
        if (it == captures_.end()) return fail(a, "replay: unknown capture " + w[0]);
        inject(it->second);
    } else if (v == "assert_digest") {
        bool seq = !(w.size() == 3 && w[2] == "noseq");
        std::string d = digest(seq);
        if (w[0] == "save") {
            saved_digests_[w[1]] = d;
        } else {
            auto it = saved_digests_.find(w[1]);
            if (it == saved_digests_.end()) return fail(a, "assert_digest: nothing saved as " + w[1]);
            if (it->second != d) {
                // Report the first differing line.
                std::istringstream x(it->second), y(d);
                std::string lx, ly;
                while (true) {
                    bool gx = static_cast<bool>(std::getline(x, lx));
                    bool gy = static_cast<bool>(std::getline(y, ly));
                    if (!gx && !gy) break;
                    if (!gx) lx = "<end>";
                    if (!gy) ly = "<end>";
                    if (lx != ly) break;
                }
                fail(a, "digest " + w[1] + " changed: '" + lx + "' became '" + ly + "'");
            }
        }
    } else if (v == "assert_invariants") {
        for (auto& viol : check_invariants(*this)) fail(a, to_string(viol));
    } else if (v == "assert_state") {
        check_assert(a);
    }
}

void Simulator::check_assert(const ScenarioAction& a) {
    const auto& w = a.args;
    const auto& k = w[0];
    auto tree_at = [&](std::size_t at) {
        return TreeRef{topo_.sources[need_source(topo_, w[at])].ip, need_group(w[at + 1])};
    };
    auto expect = [&](const std::string& what, const std::string& got, const std::string& want) {
        if (got != want) fail(a, what + ": expected " + want + ", got " + got);
    };
    auto live = [&](int r) -> const Router* {
        if (!alive(r)) {
            fail(a, topo_.routers[r].name + " is down");
            return nullptr;
        }
        return &routers_[r];
    };

    if (k == "tree" || k == "parent" || k == "root" || k == "rpc" || k == "interested") {
        int r = need_router(topo_, w[1]);
        TreeRef t = tree_at(2);
        const Router* rt = live(r);
        if (!rt) return;
        const TreeEntry* e = rt->tree(t);
        std::string what = k + " " + w[1] + " " + to_string(t);
        if (k == "tree") return expect(what, e ? to_string(e->state) : "INACTIVE", w[4]);
        if (k == "parent") {
            std::string got = "-";
            if (e && e->parent) {
                int o = topo_.owner_of(*e->parent);
                got = o >= 0 ? topo_.routers[o].name : ip_to_string(*e->parent);
            }
            return expect(what, got, w[4]);
        }
        if (k == "root") {
            std::string got = e && e->root_iface ? topo_.iface(r, e->root_iface).name : "-";
            return expect(what, got, w[4]);
        }
        if (k == "rpc") return expect(what, e ? std::to_string(e->my_metric.rpc) : "-", w[4]);
        return expect(what, e && e->interested ? "1" : "0", w[4]);
    }
    if (k == "assert" || k == "fwd" || k == "di") {
        int r = need_router(topo_, w[1]);
        int i = need_iface(topo_, r, w[2]);
        TreeRef t = tree_at(3);
        const Router* rt = live(r);
        if (!rt) return;
        const TreeEntry* e = rt->tree(t);
        std::string what = k + " " + w[1] + " " + w[2] + " " + to_string(t);
        const InterfaceTreeState* its = nullptr;
        if (e)
            if (auto it = e->ifaces.find(i); it != e->ifaces.end()) its = &it->second;
        if (!its) return expect(what, "-", w[5]);
        if (k == "assert")
            return expect(what, its->role == InterfaceRole::Root ? "root" : to_string(its->assert_state), w[5]);
        if (k == "fwd") return expect(what, to_string(its->forwarding), w[5]);
        return expect(what, to_string(its->downstream_interest), w[5]);
    }
    if (k == "neighbor" || k == "upstream") {
        int r = need_router(topo_, w[1]);
        int i = need_iface(topo_, r, w[2]);
        int n = need_router(topo_, w[3]);
        int ni = iface_on_link(topo_, n, topo_.iface(r, i).link);
        const Router* rt = live(r);
        if (!rt) return;
        if (!ni) return fail(a, w[3] + " is not on the link of " + w[1] + " " + w[2]);
        const NeighborRecord* nr = rt->neighbor(i, topo_.iface(n, ni).ip);
        std::string what = k + " " + w[1] + " " + w[2] + " " + w[3];
        if (k == "neighbor") return expect(what, nr ? to_string(nr->state) : "ABSENT", w[4]);
        TreeRef t = tree_at(4);
        bool up = nr && nr->synced() && nr->upstream.count(t);
        return expect(what + " " + to_string(t), up ? "1" : "0", w[6]);
    }
    if (k == "aw") {
        int l = need_link(topo_, w[1]);
        TreeRef t = tree_at(2);
        std::vector<std::string> winners;
        for (auto& at : topo_.links[l].attached) {
            if (!alive(at.router)) continue;
            const TreeEntry* e = routers_[at.router].tree(t);
            if (!e || e->state != TreeState::Active) continue;
            auto it = e->ifaces.find(at.iface);
            if (it == e->ifaces.end()) continue;
            const auto& its = it->second;
            if (its.role == InterfaceRole::NonRoot && !its.source_attached && its.assert_state == AssertState::AW)
                winners.push_back(topo_.routers[at.router].name);
        }
        std::string got = winners.empty() ? "-" : winners.front();
        for (std::size_t x = 1; x < winners.size(); ++x) got += "," + winners[x];
        return expect("aw " + w[1] + " " + to_string(t), got, w[4]);
    }
    if (k == "receiving") {
        int h = need_host(topo_, w[1]);
        TreeRef t = tree_at(2);
        auto last = last_delivery(h, t);
        bool recent = last && *last + 3 * kSecond >= now_;
        return expect("receiving " + w[1] + " " + to_string(t), recent ? "1" : "0", w[4]);
    }
}

Simulator run_scenario(const Scenario& s, SimOptions opt) {
    Simulator sim(scenario_topology(s), opt);
    sim.load(s);
    sim.run_until(s.end);
    if (opt.trace) sim.trace_final_digests();
    return sim;
}

}  // namespace hpim
