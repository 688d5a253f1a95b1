#include "saev/amod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace saev {

namespace {

std::string subs(std::initializer_list<int> parts) {
    std::string s;
    for (const int p : parts) {
        s += '_';
        s += std::to_string(p);
    }
    return s;
}

[[noreturn]] void bad_state(const std::string& what) {
    throw std::invalid_argument("fleet state: " + what);
}

} // namespace

int FleetState::parked_node(int k) const {
    for (int i = 0; i < num_nodes(); ++i)
        if (parked(k, i) != 0)
            return i;
    return -1;
}

std::pair<int, int> FleetState::transit_target(int k) const {
    const auto& m = transit[k];
    for (int i = 0; i < m.rows(); ++i)
        for (int th = 0; th < m.cols(); ++th)
            if (m(i, th) != 0)
                return {i, th};
    return {-1, -1};
}

void FleetState::validate(const Network& net, const ModelParams& params) const {
    const int n = net.size();
    const int k_count = num_vehicles();
    if (waiting.rows() != n || waiting.cols() != n)
        bad_state("waiting table shape does not match the network");
    if (parked.cols() != n)
        bad_state("parked table shape does not match the network");
    if (static_cast<int>(transit.size()) != k_count || soc.size() != k_count)
        bad_state("vehicle table sizes disagree");
    for (int i = 0; i < n; ++i) {
        if (waiting(i, i) != 0)
            bad_state("queued passengers on the diagonal at node " + std::to_string(i));
        for (int j = 0; j < n; ++j)
            if (waiting(i, j) < 0)
                bad_state("negative queue at pair " + std::to_string(i) + "," + std::to_string(j));
    }
    for (int k = 0; k < k_count; ++k) {
        int places = 0;
        for (int i = 0; i < n; ++i) {
            if (parked(k, i) != 0 && parked(k, i) != 1)
                bad_state("parked flag not 0/1 for vehicle " + std::to_string(k));
            places += parked(k, i);
        }
        const auto& m = transit[k];
        if (m.rows() != n)
            bad_state("transit table shape does not match the network");
        for (int i = 0; i < n; ++i) {
            const int cap = net.theta_cap(i);
            for (int th = 0; th < m.cols(); ++th) {
                if (m(i, th) != 0 && m(i, th) != 1)
                    bad_state("transit flag not 0/1 for vehicle " + std::to_string(k));
                if (th > cap && m(i, th) != 0)
                    bad_state("countdown past the longest inbound trip for vehicle " +
                              std::to_string(k) + " at node " + std::to_string(i));
                places += m(i, th);
            }
        }
        if (places != 1)
            bad_state("vehicle " + std::to_string(k) + " occupies " + std::to_string(places) +
                      " places, expected exactly 1");
        if (soc[k] < params.soc_min - 1e-6 || soc[k] > params.soc_max + 1e-6)
            bad_state("state of charge out of range for vehicle " + std::to_string(k));
    }
}

FleetState make_state(const Network& net, int vehicles, const ModelParams& params) {
    FleetState st;
    const int n = net.size();
    int maxcap = 0;
    for (int i = 0; i < n; ++i)
        maxcap = std::max(maxcap, net.theta_cap(i));
    st.waiting = Eigen::MatrixXi::Zero(n, n);
    st.parked = Eigen::MatrixXi::Zero(vehicles, n);
    st.transit.assign(vehicles, Eigen::MatrixXi::Zero(n, maxcap + 1));
    st.soc = Eigen::VectorXd::Constant(vehicles, params.soc_init);
    for (int k = 0; k < vehicles; ++k)
        st.parked(k, 0) = 1;
    return st;
}

VariableLayout::VariableLayout(const Network& net, int vehicles, int steps)
    : nodes_(net.size()), vehicles_(vehicles), steps_(steps) {
    theta_cap_.resize(nodes_);
    node_off_.resize(nodes_);
    int off = 0;
    for (int i = 0; i < nodes_; ++i) {
        theta_cap_[i] = net.theta_cap(i);
        max_theta_cap_ = std::max(max_theta_cap_, theta_cap_[i]);
        node_off_[i] = off;
        off += theta_cap_[i] + 1;
    }
    move_per_vehicle_ = off;
    const int np = pairs();
    wait_base_ = 0;
    move_base_ = wait_base_ + np * steps_;
    park_base_ = move_base_ + vehicles_ * move_per_vehicle_ * steps_;
    soc_base_ = park_base_ + vehicles_ * nodes_ * steps_;
    chg_base_ = soc_base_ + vehicles_ * steps_;
    dis_base_ = chg_base_ + vehicles_ * steps_;
    pick_base_ = dis_base_ + vehicles_ * steps_;
    relo_base_ = pick_base_ + vehicles_ * np * steps_;
    total_ = relo_base_ + vehicles_ * np * steps_;
}

int VariableLayout::pair_index(int i, int j) const {
    return i * (nodes_ - 1) + (j < i ? j : j - 1);
}

int VariableLayout::wait_col(int i, int j, int t) const {
    return wait_base_ + pair_index(i, j) * steps_ + t;
}

int VariableLayout::move_col(int k, int i, int theta, int t) const {
    return move_base_ + (k * move_per_vehicle_ + node_off_[i] + theta) * steps_ + t;
}

int VariableLayout::park_col(int k, int i, int t) const {
    return park_base_ + (k * nodes_ + i) * steps_ + t;
}

int VariableLayout::soc_col(int k, int t) const { return soc_base_ + k * steps_ + t; }
int VariableLayout::chg_col(int k, int t) const { return chg_base_ + k * steps_ + t; }
int VariableLayout::dis_col(int k, int t) const { return dis_base_ + k * steps_ + t; }

int VariableLayout::pick_col(int k, int i, int j, int t) const {
    return pick_base_ + (k * pairs() + pair_index(i, j)) * steps_ + t;
}

int VariableLayout::relo_col(int k, int i, int j, int t) const {
    return relo_base_ + (k * pairs() + pair_index(i, j)) * steps_ + t;
}

VariableLayout::VarRef VariableLayout::decode(int col) const {
    if (col < 0 || col >= total_)
        throw std::out_of_range("decode: column out of range");
    VarRef r{};
    auto unpair = [&](int p) {
        r.node_a = p / (nodes_ - 1);
        const int rem = p % (nodes_ - 1);
        r.node_b = rem < r.node_a ? rem : rem + 1;
    };
    if (col >= relo_base_) {
        r.family = Family::Relo;
        int rest = col - relo_base_;
        r.step = rest % steps_;
        rest /= steps_;
        r.vehicle = rest / pairs();
        unpair(rest % pairs());
    } else if (col >= pick_base_) {
        r.family = Family::Pick;
        int rest = col - pick_base_;
        r.step = rest % steps_;
        rest /= steps_;
        r.vehicle = rest / pairs();
        unpair(rest % pairs());
    } else if (col >= dis_base_) {
        r.family = Family::Dis;
        r.vehicle = (col - dis_base_) / steps_;
        r.step = (col - dis_base_) % steps_;
    } else if (col >= chg_base_) {
        r.family = Family::Chg;
        r.vehicle = (col - chg_base_) / steps_;
        r.step = (col - chg_base_) % steps_;
    } else if (col >= soc_base_) {
        r.family = Family::Soc;
        r.vehicle = (col - soc_base_) / steps_;
        r.step = (col - soc_base_) % steps_;
    } else if (col >= park_base_) {
        r.family = Family::Park;
        int rest = col - park_base_;
        r.step = rest % steps_;
        rest /= steps_;
        r.vehicle = rest / nodes_;
        r.node_a = rest % nodes_;
    } else if (col >= move_base_) {
        r.family = Family::Move;
        int rest = col - move_base_;
        r.step = rest % steps_;
        rest /= steps_;
        r.vehicle = rest / move_per_vehicle_;
        int slot = rest % move_per_vehicle_;
        // node_off_ is increasing; find the node owning this slot
        int i = static_cast<int>(std::upper_bound(node_off_.begin(), node_off_.end(), slot) -
                                 node_off_.begin()) - 1;
        r.node_a = i;
        r.theta = slot - node_off_[i];
    } else {
        r.family = Family::Wait;
        int rest = col - wait_base_;
        r.step = rest % steps_;
        unpair(rest / steps_);
    }
    return r;
}

std::string VariableLayout::name(int col) const {
    const VarRef r = decode(col);
    switch (r.family) {
    case Family::Wait: return "wait" + subs({r.node_a, r.node_b, r.step});
    case Family::Move: return "move" + subs({r.vehicle, r.node_a, r.theta, r.step});
    case Family::Park: return "park" + subs({r.vehicle, r.node_a, r.step});
    case Family::Soc: return "soc" + subs({r.vehicle, r.step});
    case Family::Chg: return "chg" + subs({r.vehicle, r.step});
    case Family::Dis: return "dis" + subs({r.vehicle, r.step});
    case Family::Pick: return "pick" + subs({r.vehicle, r.node_a, r.node_b, r.step});
    case Family::Relo: return "relo" + subs({r.vehicle, r.node_a, r.node_b, r.step});
    }
    throw std::logic_error("name: unreachable");
}

AmodInstance assemble(const FleetState& state, const PredictionWindow& window,
                      const ModelParams& params, const Network& net) {
    params.validate();
    state.validate(net, params);
    const int n = net.size();
    const int kk = state.num_vehicles();
    const int T = window.steps();
    if (T < 2)
        throw std::invalid_argument("assemble: window needs at least two steps");
    if (window.outage.rows() != n || window.outage.cols() != T)
        throw std::invalid_argument("assemble: outage table shape mismatch");
    if (window.requirement.size() != T || window.price.size() != T)
        throw std::invalid_argument("assemble: requirement or price length mismatch");
    for (const auto& p : window.arrivals) {
        if (p.rows() != n || p.cols() != n)
            throw std::invalid_argument("assemble: arrival table shape mismatch");
        for (int i = 0; i < n; ++i) {
            if (p(i, i) != 0)
                throw std::invalid_argument("assemble: arrivals on the diagonal");
            for (int j = 0; j < n; ++j)
                if (p(i, j) < 0)
                    throw std::invalid_argument("assemble: negative arrivals");
        }
    }
    for (int t = 0; t < T; ++t)
        if (window.requirement[t] < 0.0)
            throw std::invalid_argument("assemble: negative building requirement");

    AmodInstance inst;
    inst.layout = VariableLayout(net, kk, T);
    inst.state0 = state;
    inst.window = window;
    inst.params = params;
    inst.travel = net.travel_table();
    const VariableLayout& L = inst.layout;
    MilpInstance& m = inst.milp;

    const double inf = std::numeric_limits<double>::infinity();

    // Columns, in layout order. Names come from the layout so the MPS export
    // and the in-memory model can never disagree.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                for (int t = 0; t < T; ++t)
                    m.add_col(VarKind::Continuous, 0.0, inf, 1.0, L.name(L.wait_col(i, j, t)));
    for (int k = 0; k < kk; ++k)
        for (int i = 0; i < n; ++i)
            for (int th = 0; th <= L.theta_cap(i); ++th)
                for (int t = 0; t < T; ++t)
                    m.add_col(VarKind::Binary, 0.0, 1.0, 0.0, L.name(L.move_col(k, i, th, t)));
    for (int k = 0; k < kk; ++k)
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < T; ++t)
                m.add_col(VarKind::Binary, 0.0, 1.0, 0.0, L.name(L.park_col(k, i, t)));
    for (int k = 0; k < kk; ++k)
        for (int t = 0; t < T; ++t)
            m.add_col(VarKind::Continuous, params.soc_min, params.soc_max, 0.0,
                      L.name(L.soc_col(k, t)));
    for (int k = 0; k < kk; ++k)
        for (int t = 0; t < T; ++t)
            m.add_col(VarKind::Continuous, 0.0, params.charge_rate,
                      params.energy_weight * window.price[t], L.name(L.chg_col(k, t)));
    for (int k = 0; k < kk; ++k)
        for (int t = 0; t < T; ++t)
            m.add_col(VarKind::Continuous, 0.0, params.discharge_rate,
                      params.energy_weight *
                          (params.cycling_cost_eur_kwh - params.v2b_efficiency * window.price[t]),
                      L.name(L.dis_col(k, t)));
    for (int k = 0; k < kk; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    for (int t = 0; t < T; ++t)
                        m.add_col(VarKind::Binary, 0.0, 1.0, 0.0,
                                  L.name(L.pick_col(k, i, j, t)));
    for (int k = 0; k < kk; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    for (int t = 0; t < T; ++t)
                        m.add_col(VarKind::Binary, 0.0, 1.0,
                                  params.relocation_weight * inst.travel(i, j),
                                  L.name(L.relo_col(k, i, j, t)));

    if (m.num_cols() != L.total_cols())
        throw std::logic_error("assemble: column count disagrees with the layout");

    // Step 0 is the handed-off state.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                m.fix_col(L.wait_col(i, j, 0), state.waiting(i, j));
    for (int k = 0; k < kk; ++k) {
        for (int i = 0; i < n; ++i) {
            m.fix_col(L.park_col(k, i, 0), state.parked(k, i));
            for (int th = 0; th <= L.theta_cap(i); ++th)
                m.fix_col(L.move_col(k, i, th, 0), state.transit[k](i, th));
        }
        const double g0 = std::clamp(state.soc[k], params.soc_min, params.soc_max);
        m.fix_col(L.soc_col(k, 0), g0);
    }

    std::vector<std::pair<int, double>> terms;

    // Queue balance: tomorrow's queue is today's plus arrivals minus pickups.
    for (int t = 0; t + 1 < T; ++t) {
        const auto& p = window.arrivals[t];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                terms.clear();
                terms.emplace_back(L.wait_col(i, j, t + 1), 1.0);
                terms.emplace_back(L.wait_col(i, j, t), -1.0);
                for (int k = 0; k < kk; ++k)
                    terms.emplace_back(L.pick_col(k, i, j, t), 1.0);
                m.add_row("queue" + subs({i, j, t}), RowSense::EQ, p(i, j), terms);
            }
        }
    }

    // Arrival countdown: slot th at t+1 feeds from slot th+1 at t, and from
    // departures whose travel time lands them there.
    for (int k = 0; k < kk; ++k) {
        for (int i = 0; i < n; ++i) {
            const int cap = L.theta_cap(i);
            for (int th = 0; th <= cap; ++th) {
                for (int t = 0; t + 1 < T; ++t) {
                    terms.clear();
                    terms.emplace_back(L.move_col(k, i, th, t + 1), 1.0);
                    if (th < cap)
                        terms.emplace_back(L.move_col(k, i, th + 1, t), -1.0);
                    for (int j = 0; j < n; ++j) {
                        if (j == i || inst.travel(j, i) - 1 != th)
                            continue;
                        terms.emplace_back(L.pick_col(k, j, i, t), -1.0);
                        terms.emplace_back(L.relo_col(k, j, i, t), -1.0);
                    }
                    m.add_row("arrive" + subs({k, i, th, t}), RowSense::EQ, 0.0, terms);
                }
            }
        }
    }

    // Parking balance: stay parked, or absorb a fresh arrival, or leave on a
    // dispatch.
    for (int k = 0; k < kk; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int t = 0; t + 1 < T; ++t) {
                terms.clear();
                terms.emplace_back(L.park_col(k, i, t + 1), 1.0);
                terms.emplace_back(L.park_col(k, i, t), -1.0);
                terms.emplace_back(L.move_col(k, i, 0, t), -1.0);
                for (int j = 0; j < n; ++j) {
                    if (j == i)
                        continue;
                    terms.emplace_back(L.pick_col(k, i, j, t), 1.0);
                    terms.emplace_back(L.relo_col(k, i, j, t), 1.0);
                }
                m.add_row("parkbal" + subs({k, i, t}), RowSense::EQ, 0.0, terms);
            }
        }
    }

    // Energy balance: drain while in motion, gain while charging, lose while
    // feeding the building.
    for (int k = 0; k < kk; ++k) {
        for (int t = 0; t + 1 < T; ++t) {
            terms.clear();
            terms.emplace_back(L.soc_col(k, t + 1), 1.0);
            terms.emplace_back(L.soc_col(k, t), -1.0);
            terms.emplace_back(L.chg_col(k, t), -1.0);
            terms.emplace_back(L.dis_col(k, t), 1.0);
            for (int i = 0; i < n; ++i)
                for (int th = 0; th <= L.theta_cap(i); ++th)
                    terms.emplace_back(L.move_col(k, i, th, t + 1), params.drive_rate);
            m.add_row("energy" + subs({k, t}), RowSense::EQ, 0.0, terms);
        }
    }

    // Each vehicle is in exactly one place.
    for (int k = 0; k < kk; ++k) {
        for (int t = 0; t < T; ++t) {
            terms.clear();
            for (int i = 0; i < n; ++i) {
                terms.emplace_back(L.park_col(k, i, t), 1.0);
                for (int th = 0; th <= L.theta_cap(i); ++th)
                    terms.emplace_back(L.move_col(k, i, th, t), 1.0);
            }
            m.add_row("onehot" + subs({k, t}), RowSense::EQ, 1.0, terms);
        }
    }

    // At most one task per step: parking tomorrow and dispatching today are
    // mutually exclusive alternatives. The final step has no tomorrow, so
    // only the dispatch flags remain.
    for (int k = 0; k < kk; ++k) {
        for (int t = 0; t < T; ++t) {
            terms.clear();
            if (t + 1 < T)
                for (int i = 0; i < n; ++i)
                    terms.emplace_back(L.park_col(k, i, t + 1), 1.0);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i == j)
                        continue;
                    terms.emplace_back(L.pick_col(k, i, j, t), 1.0);
                    terms.emplace_back(L.relo_col(k, i, j, t), 1.0);
                }
            }
            m.add_row("task" + subs({k, t}), RowSense::LE, 1.0, terms);
        }
    }

    // Pickups cannot outnumber the passengers present or arriving.
    for (int t = 0; t < T; ++t) {
        const auto& p = window.arrivals[t];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                terms.clear();
                for (int k = 0; k < kk; ++k)
                    terms.emplace_back(L.pick_col(k, i, j, t), 1.0);
                terms.emplace_back(L.wait_col(i, j, t), -1.0);
                m.add_row("demand" + subs({i, j, t}), RowSense::LE, p(i, j), terms);
            }
        }
    }

    // Departure reservation: a trip may only start with enough charge to
    // finish it above the floor.
    for (int k = 0; k < kk; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                const double need = params.drive_rate * inst.travel(i, j);
                for (int t = 0; t < T; ++t) {
                    terms.clear();
                    terms.emplace_back(L.soc_col(k, t), 1.0);
                    terms.emplace_back(L.pick_col(k, i, j, t), -need);
                    terms.emplace_back(L.relo_col(k, i, j, t), -need);
                    m.add_row("reserve" + subs({k, i, j, t}), RowSense::GE, params.soc_min, terms);
                }
            }
        }
    }

    // Charging needs a powered node, discharging a dark one, both parked.
    for (int k = 0; k < kk; ++k) {
        for (int t = 0; t < T; ++t) {
            terms.clear();
            terms.emplace_back(L.chg_col(k, t), 1.0);
            for (int i = 0; i < n; ++i)
                if (window.outage(i, t) == 0)
                    terms.emplace_back(L.park_col(k, i, t), -params.charge_rate);
            m.add_row("chglim" + subs({k, t}), RowSense::LE, 0.0, terms);

            terms.clear();
            terms.emplace_back(L.dis_col(k, t), 1.0);
            for (int i = 0; i < n; ++i)
                if (window.outage(i, t) != 0)
                    terms.emplace_back(L.park_col(k, i, t), -params.discharge_rate);
            m.add_row("dislim" + subs({k, t}), RowSense::LE, 0.0, terms);
        }
    }

    // Delivered backup power must cover the building shortfall.
    for (int t = 0; t < T; ++t) {
        if (window.requirement[t] <= 0.0)
            continue;
        terms.clear();
        for (int k = 0; k < kk; ++k)
            terms.emplace_back(L.dis_col(k, t), params.v2b_efficiency);
        m.add_row("cover" + subs({t}), RowSense::GE, window.requirement[t], terms);
    }

    return inst;
}

namespace {

double checked_binary(double v, const std::string& what, double tol) {
    const double r = std::round(v);
    if (std::abs(v - r) > tol || (r != 0.0 && r != 1.0))
        throw std::runtime_error("solution value " + std::to_string(v) + " for " + what +
                                 " is not binary within tolerance");
    return r;
}

} // namespace

ControlSet extract_controls(const AmodInstance& inst, const Eigen::VectorXd& x, double int_tol) {
    const VariableLayout& L = inst.layout;
    if (x.size() != L.total_cols())
        throw std::invalid_argument("extract_controls: solution length mismatch");
    const int n = L.nodes();
    const int kk = L.vehicles();
    ControlSet c;
    c.charge = Eigen::VectorXd::Zero(kk);
    c.discharge = Eigen::VectorXd::Zero(kk);
    for (int k = 0; k < kk; ++k) {
        int tasks = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                if (checked_binary(x[L.pick_col(k, i, j, 0)], L.name(L.pick_col(k, i, j, 0)),
                                   int_tol) > 0.5) {
                    c.pickups.push_back({k, i, j});
                    ++tasks;
                }
                if (checked_binary(x[L.relo_col(k, i, j, 0)], L.name(L.relo_col(k, i, j, 0)),
                                   int_tol) > 0.5) {
                    c.relocations.push_back({k, i, j});
                    ++tasks;
                }
            }
        }
        if (tasks > 1)
            throw std::runtime_error("extract_controls: vehicle " + std::to_string(k) +
                                     " was given " + std::to_string(tasks) + " tasks in one step");
        c.charge[k] = std::max(0.0, x[L.chg_col(k, 0)]);
        c.discharge[k] = std::max(0.0, x[L.dis_col(k, 0)]);
        if (c.charge[k] > 1e-7 && c.discharge[k] > 1e-7)
            throw std::runtime_error("extract_controls: vehicle " + std::to_string(k) +
                                     " charges and discharges in the same step");
    }
    c.delivered = inst.params.v2b_efficiency * c.discharge.sum();
    return c;
}

FleetState extract_next_state(const AmodInstance& inst, const Eigen::VectorXd& x, double int_tol) {
    const VariableLayout& L = inst.layout;
    if (L.steps() < 2)
        throw std::invalid_argument("extract_next_state: window has no step 1");
    if (x.size() != L.total_cols())
        throw std::invalid_argument("extract_next_state: solution length mismatch");
    const int n = L.nodes();
    const int kk = L.vehicles();
    FleetState st;
    st.waiting = Eigen::MatrixXi::Zero(n, n);
    st.parked = Eigen::MatrixXi::Zero(kk, n);
    st.transit.assign(kk, Eigen::MatrixXi::Zero(n, L.max_theta_cap() + 1));
    st.soc = Eigen::VectorXd::Zero(kk);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double v = x[L.wait_col(i, j, 1)];
            const double r = std::round(v);
            // queues are integral by construction; drift past 1e-4 means the
            // solver handed back junk
            if (std::abs(v - r) > 1e-4 || r < -0.5)
                throw std::runtime_error("extract_next_state: queue value " + std::to_string(v) +
                                         " at pair " + std::to_string(i) + "," + std::to_string(j) +
                                         " is not a count");
            st.waiting(i, j) = static_cast<int>(r);
        }
    }
    for (int k = 0; k < kk; ++k) {
        int places = 0;
        for (int i = 0; i < n; ++i) {
            const double p = checked_binary(x[L.park_col(k, i, 1)], L.name(L.park_col(k, i, 1)),
                                            int_tol);
            st.parked(k, i) = static_cast<int>(p);
            places += st.parked(k, i);
            for (int th = 0; th <= L.theta_cap(i); ++th) {
                const double a = checked_binary(x[L.move_col(k, i, th, 1)],
                                                L.name(L.move_col(k, i, th, 1)), int_tol);
                st.transit[k](i, th) = static_cast<int>(a);
                places += st.transit[k](i, th);
            }
        }
        if (places != 1)
            throw std::runtime_error("extract_next_state: vehicle " + std::to_string(k) +
                                     " occupies " + std::to_string(places) + " places at step 1");
        st.soc[k] = std::clamp(x[L.soc_col(k, 1)], inst.params.soc_min, inst.params.soc_max);
        if (x[L.soc_col(k, 1)] < inst.params.soc_min - 1e-4 ||
            x[L.soc_col(k, 1)] > inst.params.soc_max + 1e-4)
            throw std::runtime_error("extract_next_state: charge out of range for vehicle " +
                                     std::to_string(k));
    }
    return st;
}

FleetState propagate_step(const FleetState& state, const ControlSet& controls,
                          const Eigen::MatrixXi& arrivals, const ModelParams& params,
                          const Network& net) {
    const int n = state.num_nodes();
    const int kk = state.num_vehicles();
    if (arrivals.rows() != n || arrivals.cols() != n)
        throw std::invalid_argument("propagate_step: arrival table shape mismatch");

    FleetState next = state;
    next.waiting += arrivals;

    // Dispatches: vehicle must be parked at the origin or arriving there
    // this very step; it leaves immediately and lands after the travel time.
    std::vector<int> tasks(kk, 0);
    auto dispatch = [&](const Dispatch& d, bool pickup) {
        if (d.vehicle < 0 || d.vehicle >= kk || d.origin < 0 || d.origin >= n || d.destination < 0 ||
            d.destination >= n || d.origin == d.destination)
            throw std::invalid_argument("propagate_step: malformed dispatch");
        if (++tasks[d.vehicle] > 1)
            throw std::invalid_argument("propagate_step: vehicle " + std::to_string(d.vehicle) +
                                        " given two tasks");
        const bool present = state.parked(d.vehicle, d.origin) == 1 ||
                             state.transit[d.vehicle](d.origin, 0) == 1;
        if (!present)
            throw std::invalid_argument("propagate_step: vehicle " + std::to_string(d.vehicle) +
                                        " is not at node " + std::to_string(d.origin));
        const int steps = net.travel_steps(d.origin, d.destination);
        const double need = params.soc_min + params.drive_rate * steps;
        if (state.soc[d.vehicle] < need - 1e-7)
            throw std::invalid_argument("propagate_step: vehicle " + std::to_string(d.vehicle) +
                                        " lacks charge for the trip");
        if (pickup) {
            next.waiting(d.origin, d.destination) -= 1;
            if (next.waiting(d.origin, d.destination) < 0)
                throw std::invalid_argument("propagate_step: pickup without a passenger at pair " +
                                            std::to_string(d.origin) + "," +
                                            std::to_string(d.destination));
        }
    };
    for (const auto& d : controls.pickups)
        dispatch(d, true);
    for (const auto& d : controls.relocations)
        dispatch(d, false);

    // Location update: absorb arrivals into parking, shift countdowns, then
    // remove dispatched vehicles and seed their new transit entries.
    for (int k = 0; k < kk; ++k) {
        for (int i = 0; i < n; ++i) {
            next.parked(k, i) = state.parked(k, i) + state.transit[k](i, 0);
            const int cap = net.theta_cap(i);
            for (int th = 0; th < cap; ++th)
                next.transit[k](i, th) = state.transit[k](i, th + 1);
            next.transit[k](i, cap) = 0;
        }
    }
    auto depart = [&](const Dispatch& d) {
        next.parked(d.vehicle, d.origin) -= 1;
        if (next.parked(d.vehicle, d.origin) < 0)
            throw std::invalid_argument("propagate_step: dispatch from an empty node");
        const int steps = net.travel_steps(d.origin, d.destination);
        next.transit[d.vehicle](d.destination, steps - 1) = 1;
    };
    for (const auto& d : controls.pickups)
        depart(d);
    for (const auto& d : controls.relocations)
        depart(d);

    // Energy update against the post-move position.
    if (controls.charge.size() != kk || controls.discharge.size() != kk)
        throw std::invalid_argument("propagate_step: control vector sizes mismatch");
    for (int k = 0; k < kk; ++k) {
        const double e = controls.charge[k];
        const double g = controls.discharge[k];
        if (e < -1e-12 || g < -1e-12)
            throw std::invalid_argument("propagate_step: negative charge or discharge");
        if (e > params.charge_rate + 1e-7 || g > params.discharge_rate + 1e-7)
            throw std::invalid_argument("propagate_step: charge or discharge beyond the rate cap");
        // The parked flag covers the whole step, so a vehicle may still
        // charge or discharge during the step it departs.
        if ((e > 1e-12 || g > 1e-12) && state.parked_node(k) < 0)
            throw std::invalid_argument("propagate_step: vehicle " + std::to_string(k) +
                                        " transfers energy while not parked");
        double drain = 0.0;
        if (next.transit[k].sum() > 0)
            drain = params.drive_rate;
        next.soc[k] = state.soc[k] + e - g - drain;
        if (next.soc[k] < params.soc_min - 1e-6 || next.soc[k] > params.soc_max + 1e-6)
            throw std::invalid_argument("propagate_step: vehicle " + std::to_string(k) +
                                        " leaves the charge window");
        next.soc[k] = std::clamp(next.soc[k], params.soc_min, params.soc_max);
    }
    return next;
}

} // namespace saev
