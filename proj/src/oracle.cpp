#include "saev/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace saev {

// Exhaustive window solver. Movement decisions (stay, pick up, relocate) are
// enumerated vehicle by vehicle and step by step; for any fixed movement
// assignment the charge and discharge schedule is a small linear program
// whose optimum has a closed form, provided the SOC bounds stay slack. The
// preconditions below guarantee that slack, and the solver refuses instances
// that lack it instead of guessing.

namespace {

struct Action {
    enum Kind { Stay, Pick, Relo } kind = Stay;
    int from = -1;
    int to = -1;
};

struct OracleSearch {
    // problem data
    int n = 0, kk = 0, tt = 0;
    const AmodInstance* inst = nullptr;
    double price = 0.0;   // constant across the window, checked
    double dis_cost = 0.0; // objective cost of one unit of discharge
    bool outage_mode = false;

    // search state, mutated and restored along the depth-first walk
    Eigen::MatrixXi avail;         // passengers available at the current step
    std::vector<Eigen::MatrixXi> queue_at; // queue at each step, filled as the walk deepens
    std::vector<int> pos;          // per vehicle: current or destination node
    std::vector<int> cnt;          // per vehicle: steps until arrival, -1 when parked
    std::vector<Action> actions;   // (t * kk + k), movement choice trace
    double acc = 0.0;

    // incumbent
    bool found = false;
    double best = 0.0;
    std::vector<Action> best_actions;

    double cover_cost(int t, bool& feasible) const {
        int eligible = 0;
        for (int k = 0; k < kk; ++k)
            if (cnt[k] == -1 && inst->window.outage(pos[k], t) != 0)
                ++eligible;
        const double cap =
            eligible * inst->params.discharge_rate * inst->params.v2b_efficiency;
        const double req = inst->window.requirement[t];
        if (req > cap + 1e-9) {
            feasible = false;
            return 0.0;
        }
        feasible = true;
        if (dis_cost < 0.0)
            return dis_cost * eligible * inst->params.discharge_rate;
        if (req > 0.0)
            return dis_cost * req / inst->params.v2b_efficiency;
        return 0.0;
    }

    // Minimal total charge for one vehicle over a fixed movement plan. The
    // floor and every departure reservation are deadlines; charge persists,
    // so the minimal total is the largest deficit, and it is reachable iff
    // the parked slots before each deadline can supply that deadline's
    // deficit. Returns false when they cannot.
    bool charge_need(const std::vector<Action>& plan, int k, double& total) const {
        const ModelParams& p = inst->params;
        double soc = std::clamp(inst->state0.soc[k], p.soc_min, p.soc_max);
        int c = -1;
        if (inst->state0.parked_node(k) < 0)
            c = inst->state0.transit_target(k).second;
        double max_need = 0.0;
        double capacity_before = 0.0; // charge reachable strictly before the current step
        for (int t = 0; t < tt; ++t) {
            double require = p.soc_min;
            if (t < tt - 1) {
                const Action& a = plan[t * kk + k];
                if (a.kind != Action::Stay)
                    require = std::max(require,
                                       p.soc_min + p.drive_rate * inst->travel(a.from, a.to));
            }
            const double need = require - soc;
            if (need > capacity_before + 1e-12) {
                total = 0.0;
                return false;
            }
            max_need = std::max(max_need, need);
            if (c == -1)
                capacity_before += p.charge_rate;
            if (t == tt - 1)
                break;
            const Action& a = plan[t * kk + k];
            if (a.kind != Action::Stay) {
                c = inst->travel(a.from, a.to) - 1;
                soc -= p.drive_rate;
            } else if (c > 0) {
                --c;
                soc -= p.drive_rate;
            } else {
                c = -1; // arrived or stays parked
            }
        }
        total = std::max(0.0, max_need);
        return true;
    }

    void finish_leaf() {
        double total = acc;
        if (!outage_mode) {
            for (int k = 0; k < kk; ++k) {
                double need = 0.0;
                if (!charge_need(actions, k, need))
                    return;
                total += inst->params.energy_weight * price * need;
            }
        }
        if (!found || total < best - 1e-12) {
            found = true;
            best = total;
            best_actions = actions;
        }
    }

    void search_step(int t) {
        double cover = 0.0;
        if (outage_mode) {
            bool feasible = true;
            cover = cover_cost(t, feasible);
            if (!feasible)
                return;
            acc += cover;
        }
        if (found) {
            double bound = acc;
            if (outage_mode && dis_cost < 0.0)
                bound += dis_cost * kk * inst->params.discharge_rate * (tt - 1 - t);
            if (bound > best + 1e-12) {
                if (outage_mode)
                    acc -= cover;
                return;
            }
        }
        if (t == tt - 1)
            finish_leaf();
        else
            search_vehicle(t, 0);
        if (outage_mode)
            acc -= cover;
    }

    void search_vehicle(int t, int k) {
        if (k == kk) {
            transition(t);
            return;
        }
        Action& slot = actions[t * kk + k];
        // stay
        slot = Action{Action::Stay, -1, -1};
        search_vehicle(t, k + 1);
        // dispatches need the vehicle present at a node right now
        if (cnt[k] != -1 && cnt[k] != 0)
            return;
        const int at = pos[k];
        const int save_pos = pos[k];
        const int save_cnt = cnt[k];
        for (int j = 0; j < n; ++j) {
            if (j == at)
                continue;
            // pickup
            if (avail(at, j) > 0) {
                avail(at, j) -= 1;
                pos[k] = j;
                cnt[k] = inst->travel(at, j); // transition will tick it down
                slot = Action{Action::Pick, at, j};
                search_vehicle(t, k + 1);
                pos[k] = save_pos;
                cnt[k] = save_cnt;
                avail(at, j) += 1;
            }
            // relocation
            const double relo_cost = inst->params.relocation_weight * inst->travel(at, j);
            pos[k] = j;
            cnt[k] = inst->travel(at, j);
            slot = Action{Action::Relo, at, j};
            acc += relo_cost;
            search_vehicle(t, k + 1);
            acc -= relo_cost;
            pos[k] = save_pos;
            cnt[k] = save_cnt;
        }
        slot = Action{Action::Stay, -1, -1};
    }

    void transition(int t) {
        // queue advances to what is left after this step's pickups
        queue_at[t + 1] = avail;
        const Eigen::MatrixXi saved_avail = avail;
        std::vector<int> saved_cnt = cnt;

        for (int k = 0; k < kk; ++k) {
            if (cnt[k] > 0)
                --cnt[k];
            else
                cnt[k] = -1; // fresh arrivals park, parked stay parked
        }
        // dispatched vehicles were assigned cnt = travel above, so the tick
        // lands them at travel - 1, entering the countdown correctly
        avail = queue_at[t + 1] + inst->window.arrivals[t + 1];
        acc += queue_at[t + 1].sum();

        search_step(t + 1);

        acc -= queue_at[t + 1].sum();
        avail = saved_avail;
        cnt = saved_cnt;
    }
};

} // namespace

Solution oracle_solve(const AmodInstance& inst, const OracleLimits& limits) {
    const VariableLayout& L = inst.layout;
    const int n = L.nodes();
    const int kk = L.vehicles();
    const int tt = L.steps();
    const ModelParams& p = inst.params;

    // price must be flat, otherwise charge placement affects cost and the
    // closed forms below stop being optimal
    for (int t = 1; t < tt; ++t)
        if (std::abs(inst.window.price[t] - inst.window.price[0]) > 1e-12)
            throw OracleUnsupported("oracle: window price varies across steps");
    const double price = inst.window.price[0];

    bool outage_mode = false;
    for (int t = 0; t < tt && !outage_mode; ++t) {
        if (inst.window.requirement[t] > 0.0)
            outage_mode = true;
        for (int i = 0; i < n && !outage_mode; ++i)
            if (inst.window.outage(i, t) != 0)
                outage_mode = true;
    }

    const int max_travel = inst.travel.maxCoeff();
    if (outage_mode) {
        // every vehicle must keep the floor slack no matter what it does
        for (int k = 0; k < kk; ++k) {
            const double worst = tt * (p.drive_rate + p.discharge_rate);
            const double soc0 = std::clamp(inst.state0.soc[k], p.soc_min, p.soc_max);
            if (soc0 - worst < p.soc_min + p.drive_rate * max_travel - 1e-12)
                throw OracleUnsupported(
                    "oracle: outage window with tight charge on vehicle " + std::to_string(k) +
                    "; the floor could bind and the closed-form schedule would not apply");
        }
    } else {
        // charging must never hit the ceiling, wherever it is placed
        for (int k = 0; k < kk; ++k) {
            const double soc0 = std::clamp(inst.state0.soc[k], p.soc_min, p.soc_max);
            if (soc0 + tt * p.charge_rate > p.soc_max + 1e-12)
                throw OracleUnsupported(
                    "oracle: charge ceiling could bind on vehicle " + std::to_string(k) +
                    "; the just-in-time schedule would not apply");
        }
    }

    const double branch = 1.0 + 2.0 * (n - 1);
    if (std::pow(branch, static_cast<double>(kk) * (tt - 1)) > limits.max_assignments)
        throw OracleUnsupported("oracle: instance too large to enumerate");

    OracleSearch s;
    s.n = n;
    s.kk = kk;
    s.tt = tt;
    s.inst = &inst;
    s.price = price;
    s.dis_cost = p.energy_weight * (p.cycling_cost_eur_kwh - p.v2b_efficiency * price);
    s.outage_mode = outage_mode;
    s.queue_at.assign(tt, Eigen::MatrixXi::Zero(n, n));
    s.queue_at[0] = inst.state0.waiting;
    s.avail = inst.state0.waiting + inst.window.arrivals[0];
    s.pos.resize(kk);
    s.cnt.resize(kk);
    for (int k = 0; k < kk; ++k) {
        const int pk = inst.state0.parked_node(k);
        if (pk >= 0) {
            s.pos[k] = pk;
            s.cnt[k] = -1;
        } else {
            const auto [dest, th] = inst.state0.transit_target(k);
            s.pos[k] = dest;
            s.cnt[k] = th;
        }
    }
    s.actions.assign(static_cast<std::size_t>(tt) * kk, Action{});
    s.acc = inst.state0.waiting.sum();
    s.search_step(0);

    Solution out;
    out.status = SolveStatus::Infeasible;
    if (!s.found)
        return out;

    // replay the winning assignment to fill a full column vector
    out.status = SolveStatus::Optimal;
    out.has_values = true;
    out.objective = s.best;
    out.bound = s.best;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(L.total_cols());

    std::vector<int> pos = s.pos, cnt = s.cnt;
    // the search state was restored on unwind, so rebuild the initial values
    for (int k = 0; k < kk; ++k) {
        const int pk = inst.state0.parked_node(k);
        if (pk >= 0) {
            pos[k] = pk;
            cnt[k] = -1;
        } else {
            const auto [dest, th] = inst.state0.transit_target(k);
            pos[k] = dest;
            cnt[k] = th;
        }
    }
    Eigen::MatrixXi queue = inst.state0.waiting;
    std::vector<double> soc(kk);
    for (int k = 0; k < kk; ++k)
        soc[k] = std::clamp(inst.state0.soc[k], p.soc_min, p.soc_max);

    // per-vehicle charge targets for the no-outage mode, placed greedily
    // early (the ceiling is slack by precondition, so early is always legal)
    std::vector<double> charge_left(kk, 0.0);
    if (!outage_mode) {
        for (int k = 0; k < kk; ++k)
            if (!s.charge_need(s.best_actions, k, charge_left[k]))
                throw std::logic_error("oracle: winning plan lost its charge schedule on replay");
    }

    for (int t = 0; t < tt; ++t) {
        // location and queue families at step t
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    x[L.wait_col(i, j, t)] = queue(i, j);
        for (int k = 0; k < kk; ++k) {
            if (cnt[k] == -1)
                x[L.park_col(k, pos[k], t)] = 1.0;
            else
                x[L.move_col(k, pos[k], cnt[k], t)] = 1.0;
            x[L.soc_col(k, t)] = soc[k];
        }

        // energy decisions at step t
        if (outage_mode) {
            double short_left = inst.window.requirement[t] / p.v2b_efficiency;
            for (int k = 0; k < kk; ++k) {
                if (cnt[k] != -1 || inst.window.outage(pos[k], t) == 0)
                    continue;
                double g = 0.0;
                if (s.dis_cost < 0.0)
                    g = p.discharge_rate;
                else
                    g = std::min(p.discharge_rate, std::max(0.0, short_left));
                short_left -= g;
                x[L.dis_col(k, t)] = g;
                soc[k] -= g;
            }
        } else {
            for (int k = 0; k < kk; ++k) {
                if (cnt[k] != -1 || charge_left[k] <= 0.0)
                    continue;
                const double e = std::min(p.charge_rate, charge_left[k]);
                charge_left[k] -= e;
                x[L.chg_col(k, t)] = e;
                soc[k] += e;
            }
        }

        if (t == tt - 1)
            break;

        // movements chosen at step t; anything still in transit at t+1
        // burns one step of charge
        Eigen::MatrixXi picks = Eigen::MatrixXi::Zero(n, n);
        for (int k = 0; k < kk; ++k) {
            const Action& a = s.best_actions[t * s.kk + k];
            if (a.kind == Action::Stay) {
                if (cnt[k] > 0) {
                    --cnt[k];
                    soc[k] -= p.drive_rate;
                } else {
                    cnt[k] = -1;
                }
                continue;
            }
            if (a.kind == Action::Pick) {
                x[L.pick_col(k, a.from, a.to, t)] = 1.0;
                picks(a.from, a.to) += 1;
            } else {
                x[L.relo_col(k, a.from, a.to, t)] = 1.0;
            }
            pos[k] = a.to;
            cnt[k] = inst.travel(a.from, a.to) - 1;
            soc[k] -= p.drive_rate;
        }
        queue = queue + inst.window.arrivals[t] - picks;
    }
    out.values = x;
    return out;
}

} // namespace saev
