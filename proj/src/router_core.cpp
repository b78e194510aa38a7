#include <algorithm>
#include <sstream>

#include "hpim/interest_engine.hpp"
#include "hpim/router.hpp"

namespace hpim {

Router::Router(RouterConfig cfg) : cfg_(std::move(cfg)) {
    int id = 1;
    for (auto& ic : cfg_.interfaces) {
        InterfaceState s;
        s.cfg = ic;
        s.cfg.id = id++;
        s.up = false;
        s.seq.max_sn = cfg_.max_sn;
        ifaces_.push_back(std::move(s));
    }
    for (std::size_t k = 0; k < ifaces_.size(); ++k) cfg_.interfaces[k].id = ifaces_[k].cfg.id;
}

void Router::boot(SimTime now) {
    now_ = now;
    for (auto& i : ifaces_) {
        i.up = true;
        i.seq.boot_time = next_boot_time(now, i.seq.boot_time);
        i.seq.interface_sn = 0;
        i.seq.checkpoint_sn_out = 0;
        i.next_hello = now;
        i.hellos_sent = 0;
    }
}

RouterOutput Router::dispatch(const RouterEvent& ev, SimTime now) {
    now_ = std::max(now_, now);
    out_ = {};
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, FrameIn>) {
                handle_frame(e);
            } else if constexpr (std::is_same_v<T, TimerFire>) {
            } else if constexpr (std::is_same_v<T, DataIn>) {
                out_.data_out = forward_data(e.tree, e.iface);
            } else if constexpr (std::is_same_v<T, RouteUpdate>) {
                handle_route_update(e);
            } else if constexpr (std::is_same_v<T, MembershipChange>) {
                handle_membership(e);
            } else if constexpr (std::is_same_v<T, InterfaceChange>) {
                handle_interface_change(e);
            } else if constexpr (std::is_same_v<T, NeighborDown>) {
                if (e.iface >= 1 && e.iface <= static_cast<int>(ifaces_.size()))
                    remove_neighbor(iface(e.iface), e.neighbor, "neighbor_down");
            }
        },
        ev);
    fire_timers();
    return std::move(out_);
}

void Router::trace(std::string kind, std::vector<std::pair<std::string, std::string>> fields) {
    if (!cfg_.tracing) return;
    out_.trace.push_back({std::move(kind), std::move(fields)});
}

void Router::emit(InterfaceState& i, Ipv4 dst, const Message& m, bool retransmission) {
    OutFrame f;
    f.iface = i.cfg.id;
    f.src = i.cfg.ip;
    f.dst = dst;
    f.type = m.header.msg_type;
    f.tree = message_tree(m);
    f.bytes = encode_message(m, i.cfg.ip, dst, i.cfg.key);
    f.retransmission = retransmission;
    out_.frames.push_back(std::move(f));
}

void Router::handle_frame(const FrameIn& f) {
    if (f.iface < 1 || f.iface > static_cast<int>(ifaces_.size())) return;
    auto& i = iface(f.iface);
    if (!i.up || f.src == i.cfg.ip) return;
    auto r = decode_message(f.bytes, f.src, f.dst, i.cfg.key);
    if (!r.ok()) {
        auto t = peek_type(f.bytes);
        trace("rx_error", {{"iface", i.cfg.name},
                           {"from", ip_to_string(f.src)},
                           {"type", t ? to_string(*t) : "?"},
                           {"error", to_string(r.error)}});
        return;
    }
    const Message& m = r.message;
    const BootTime bt = m.header.boot_time;
    const MsgType type = m.header.msg_type;

    if (type == MsgType::Hello) return handle_hello(i, f.src, bt, std::get<HelloBody>(m.body));
    if (type == MsgType::Sync) return handle_sync(i, f.src, bt, std::get<SyncBody>(m.body));

    auto it = i.neighbors.find(f.src);
    if (type == MsgType::Ack) {
        if (it != i.neighbors.end()) handle_ack(i, it->second, bt, std::get<AckBody>(m.body));
        return;
    }

    // Tree message.
    if (it == i.neighbors.end()) {
        start_sync_as_master(i, f.src, bt);
        return;
    }
    if (bt < it->second.seq.neighbor_boot_time) return;
    if (bt > it->second.seq.neighbor_boot_time) {
        remove_neighbor(i, f.src, "boot_time_increased");
        start_sync_as_master(i, f.src, bt);
        return;
    }
    NeighborRecord& n = it->second;
    // Without the sender's SnapshotSN the message cannot be ordered against the sync.
    if (n.seq.neighbor_snapshot_sn == 0) return;

    TreeRef t = *message_tree(m);
    SeqNum sn = std::holds_alternative<UpstreamBody>(m.body) ? std::get<UpstreamBody>(m.body).sn
                                                             : std::get<InterestBody>(m.body).sn;
    SeqStamp stamp{bt, sn};
    auto cls = classify_incoming(n.seq, t, stamp);
    maybe_ack(i, n, t, stamp);
    if (cls != Classification::Accept) {
        trace("rx_stale", {{"iface", i.cfg.name}, {"from", ip_to_string(f.src)}, {"type", to_string(type)},
                           {"tree", to_string(t)}, {"sn", std::to_string(sn)}});
        return;
    }
    if (type == MsgType::IamUpstream || type == MsgType::IamNoLongerUpstream)
        handle_upstream(i, n, type, std::get<UpstreamBody>(m.body));
    else
        handle_interest(i, n, type, std::get<InterestBody>(m.body));
}

void Router::fire_timers() {
    liveness_timers();
    sync_timers();
    retransmit_timers();
    sat_timers();
    std::vector<TreeRef> hysteresis;
    for (auto& [t, e] : trees_)
        for (auto& [id, its] : e.ifaces)
            if (its.al_hysteresis_deadline >= 0 && its.al_hysteresis_deadline <= now_) {
                its.al_hysteresis_deadline = -1;
                hysteresis.push_back(t);
            }
    for (auto& t : hysteresis) reevaluate(t);
    hello_timers();
}

SimTime Router::next_deadline() const {
    SimTime d = kNever;
    for (auto& i : ifaces_) {
        if (!i.up) continue;
        d = std::min(d, i.next_hello);
        d = std::min(d, i.rtx.next_deadline());
        for (auto& [ip, n] : i.neighbors) {
            d = std::min(d, n.liveness_deadline);
            if (n.session && n.session->i_am_master) d = std::min(d, n.session->retransmit_deadline);
        }
    }
    for (auto& [t, e] : trees_) {
        if (e.sat_deadline) d = std::min(d, *e.sat_deadline);
        for (auto& [id, its] : e.ifaces)
            if (its.al_hysteresis_deadline >= 0) d = std::min(d, its.al_hysteresis_deadline);
    }
    return d;
}

bool Router::busy() const {
    for (auto& i : ifaces_) {
        if (!i.up) continue;
        if (!i.rtx.empty()) return true;
        for (auto& [ip, n] : i.neighbors)
            if (n.session) return true;
    }
    return false;
}

std::vector<int> Router::forward_data(const TreeRef& t, int in_iface) {
    std::vector<int> out;
    if (in_iface < 1 || in_iface > static_cast<int>(ifaces_.size()) || !iface(in_iface).up) return out;
    auto r = routes_.find(t.source);
    if (r == routes_.end() || r->second.root_iface == 0) return out;
    const Route& route = r->second;
    bool in_attached = std::find(route.source_attached.begin(), route.source_attached.end(), in_iface) !=
                       route.source_attached.end();
    if (in_attached) {
        if (in_iface != route.root_iface) return out;
        handle_source_data(t);
    }
    if (in_iface != route.root_iface) return out;

    auto e = trees_.find(t);
    if (e != trees_.end()) {
        for (auto& [id, its] : e->second.ifaces) {
            if (its.role == InterfaceRole::Root || its.source_attached) continue;
            if (its.forwarding == ForwardingState::Forwarding || its.al_hysteresis_deadline > now_)
                out.push_back(id);
        }
        return out;
    }
    // No entry yet: follow the startup interest default.
    for (auto& i : ifaces_) {
        if (!i.up || i.cfg.id == route.root_iface) continue;
        if (std::find(route.source_attached.begin(), route.source_attached.end(), i.cfg.id) !=
            route.source_attached.end())
            continue;
        bool nbr = cfg_.initial_downstream_interest == DownstreamInterest::DI &&
                   std::any_of(i.neighbors.begin(), i.neighbors.end(), [](auto& kv) { return kv.second.synced(); });
        if (nbr || i.member_groups.count(t.group)) out.push_back(i.cfg.id);
    }
    return out;
}

void Router::handle_interface_change(const InterfaceChange& c) {
    if (c.iface < 1 || c.iface > static_cast<int>(ifaces_.size())) return;
    auto& i = iface(c.iface);
    auto down = [&] {
        if (!i.up) return;
        i.up = false;
        i.neighbors.clear();
        i.rtx.clear();
        i.next_hello = kNever;
        trace("iface_down", {{"iface", i.cfg.name}});
        reevaluate_all();
    };
    auto up = [&] {
        if (i.up) return;
        i.up = true;
        i.seq.boot_time = next_boot_time(now_, i.seq.boot_time);
        i.seq.interface_sn = 0;
        i.seq.checkpoint_sn_out = 0;
        i.hellos_sent = 0;
        i.next_hello = now_;
        trace("iface_up", {{"iface", i.cfg.name}, {"bt", std::to_string(i.seq.boot_time)}});
        reevaluate_all();
    };
    switch (c.kind) {
        case InterfaceChange::Kind::Down: down(); break;
        case InterfaceChange::Kind::Up: up(); break;
        case InterfaceChange::Kind::Reboot:
            down();
            up();
            break;
    }
}

// ---------------------------------------------------------------------------

std::string Router::digest(bool include_sequence) const {
    std::vector<std::string> lines;
    auto line = [&](std::ostringstream& o) { lines.push_back(o.str()); };
    for (auto& i : ifaces_) {
        std::ostringstream o;
        o << "iface " << i.cfg.name << " up=" << i.up;
        if (include_sequence)
            o << " bt=" << i.seq.boot_time << " sn=" << i.seq.interface_sn << " cp=" << i.seq.checkpoint_sn_out;
        line(o);
        for (auto& g : i.member_groups) {
            std::ostringstream m;
            m << "member " << i.cfg.name << " " << ip_to_string(g);
            line(m);
        }
        for (auto& [ip, n] : i.neighbors) {
            std::ostringstream nb;
            nb << "neighbor " << i.cfg.name << " " << ip_to_string(ip) << " " << to_string(n.state)
               << " session=" << n.session.has_value();
            if (include_sequence)
                nb << " nbt=" << n.seq.neighbor_boot_time << " nssn=" << n.seq.neighbor_snapshot_sn
                   << " myssn=" << n.seq.my_snapshot_sn_for_neighbor << " cpin=" << n.seq.checkpoint_sn_in;
            line(nb);
            for (auto& [t, m] : n.upstream) {
                std::ostringstream u;
                u << "upstream " << i.cfg.name << " " << ip_to_string(ip) << " " << to_string(t) << " "
                  << to_string(m);
                line(u);
            }
            for (auto& [t, flag] : n.interest) {
                std::ostringstream u;
                u << "interest " << i.cfg.name << " " << ip_to_string(ip) << " " << to_string(t) << " " << flag;
                line(u);
            }
            if (include_sequence)
                for (auto& [t, sn] : n.seq.per_tree_sn) {
                    std::ostringstream u;
                    u << "per_tree_sn " << i.cfg.name << " " << ip_to_string(ip) << " " << to_string(t) << " "
                      << sn;
                    line(u);
                }
        }
    }
    for (auto& [t, e] : trees_) {
        std::ostringstream o;
        o << "tree " << to_string(t) << " " << to_string(e.state) << " root="
          << (e.root_iface ? iface(e.root_iface).cfg.name : "-") << " metric=" << to_string(e.my_metric)
          << " originator=" << e.is_originator << " parent=" << (e.parent ? ip_to_string(*e.parent) : "-")
          << " interested=" << e.interested;
        line(o);
        for (auto& [id, its] : e.ifaces) {
            std::ostringstream s;
            s << "tree_iface " << to_string(t) << " " << iface(id).cfg.name << " " << to_string(its.role) << " "
              << to_string(its.assert_state) << " aw=" << (its.aw ? ip_to_string(its.aw) : "-") << " "
              << to_string(its.downstream_interest) << " " << to_string(its.forwarding)
              << " sa=" << its.source_attached << " adv=" << its.advertised_upstream;
            if (its.advertised_upstream) s << " " << to_string(its.advertised_metric);
            line(s);
        }
    }
    std::sort(lines.begin(), lines.end());
    std::ostringstream all;
    all << "router " << cfg_.name << "\n";
    for (auto& l : lines) all << l << "\n";
    return all.str();
}

std::vector<MRouteEntry> Router::mroutes() const {
    std::vector<MRouteEntry> out;
    for (auto& [t, e] : trees_) {
        MRouteEntry m;
        m.tree = t;
        m.root_iface = e.root_iface;
        for (auto& [id, its] : e.ifaces)
            if (its.forwarding == ForwardingState::Forwarding) m.forwarding_set.insert(id);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<std::string> Router::self_check() const {
    std::vector<std::string> v;
    auto bad = [&](const TreeRef& t, const std::string& what) {
        v.push_back(cfg_.name + " " + to_string(t) + ": " + what);
    };
    for (auto& [t, e] : trees_) {
        TreeEntry d = derive(e);
        if (d.state != e.state) bad(t, "state " + std::string(to_string(e.state)) + " != " + to_string(d.state));
        if (d.root_iface != e.root_iface) bad(t, "root interface stale");
        if (d.my_metric != e.my_metric) bad(t, "metric stale");
        if (d.parent != e.parent) bad(t, "parent stale");
        if (d.interested != e.interested) bad(t, "router interest stale");
        if (d.ifaces.size() != e.ifaces.size()) bad(t, "interface set stale");
        for (auto& [id, its] : e.ifaces) {
            auto o = d.ifaces.find(id);
            if (o == d.ifaces.end()) continue;
            const auto& x = o->second;
            std::string n = iface(id).cfg.name;
            if (x.role != its.role) bad(t, n + " role stale");
            if (x.assert_state != its.assert_state || x.aw != its.aw) bad(t, n + " assert stale");
            if (x.downstream_interest != its.downstream_interest) bad(t, n + " interest stale");
            if (x.forwarding != its.forwarding) bad(t, n + " forwarding stale");
            bool desired = e.state == TreeState::Active && its.role == InterfaceRole::NonRoot && !its.source_attached;
            if (desired != its.advertised_upstream) bad(t, n + " upstream advertisement stale");
            if (desired && its.advertised_metric != e.my_metric) bad(t, n + " advertised metric stale");
        }
        if (e.state != TreeState::Active)
            for (auto& i : ifaces_)
                for (auto& [ip, nr] : i.neighbors)
                    if (nr.interest.count(t)) bad(t, "interest record kept while not ACTIVE");
    }
    for (auto& i : ifaces_) {
        for (auto& [ip, n] : i.neighbors)
            if (n.synced() && i.up)
                for (auto& [t, m] : n.upstream)
                    if (!trees_.count(t)) bad(t, "upstream neighbor " + ip_to_string(ip) + " without entry");
        for (auto& p : i.rtx.pending())
            for (auto ip : p.awaiting)
                if (!i.neighbors.count(ip)) v.push_back(cfg_.name + " " + i.cfg.name + ": awaiting unknown " +
                                                        ip_to_string(ip));
    }
    return v;
}

const TreeEntry* Router::tree(const TreeRef& t) const {
    auto it = trees_.find(t);
    return it == trees_.end() ? nullptr : &it->second;
}

const InterfaceState* Router::interface(int id) const {
    if (id < 1 || id > static_cast<int>(ifaces_.size())) return nullptr;
    return &ifaces_[static_cast<std::size_t>(id - 1)];
}

const InterfaceState* Router::interface_by_name(const std::string& name) const {
    for (auto& i : ifaces_)
        if (i.cfg.name == name) return &i;
    return nullptr;
}

const NeighborRecord* Router::neighbor(int id, Ipv4 ip) const {
    auto* i = interface(id);
    if (!i) return nullptr;
    auto it = i->neighbors.find(ip);
    return it == i->neighbors.end() ? nullptr : &it->second;
}

void Router::test_set_interface_sn(int id, SeqNum sn) { iface(id).seq.interface_sn = sn; }

}  // namespace hpim
