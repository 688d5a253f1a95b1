#include "saev/scenario.hpp"

#include "saev/text_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

namespace saev {

Network::Network(std::vector<Node> nodes, Eigen::MatrixXi travel_steps,
                 Eigen::MatrixXd distance_km)
    : nodes_(std::move(nodes)),
      travel_steps_(std::move(travel_steps)),
      distance_km_(std::move(distance_km)) {}

int Network::max_inbound_steps(int i) const {
    int m = 0;
    for (int j = 0; j < size(); ++j)
        if (j != i)
            m = std::max(m, travel_steps_(j, i));
    return m;
}

int Network::max_travel_steps() const {
    return size() == 0 ? 0 : travel_steps_.maxCoeff();
}

int Network::nearest(double x, double y) const {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
        const double dx = nodes_[i].x - x;
        const double dy = nodes_[i].y - y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

double ModelParams::price_at(int step) const {
    if (price_schedule.empty())
        return price_eur_kwh;
    if (step < 0)
        step = 0;
    const int n = static_cast<int>(price_schedule.size());
    return price_schedule[std::min(step, n - 1)];
}

void ModelParams::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("params: " + msg); };
    if (!(0.0 <= soc_min && soc_min <= soc_init && soc_init <= soc_max))
        fail("need 0 <= soc_min <= soc_init <= soc_max");
    if (drive_rate <= 0.0 || charge_rate <= 0.0 || discharge_rate <= 0.0)
        fail("drive, charge and discharge rates must be positive");
    if (!(v2b_efficiency > 0.0 && v2b_efficiency <= 1.0))
        fail("v2b_efficiency must be in (0, 1]");
    if (relocation_weight < 0.0 || energy_weight < 0.0)
        fail("objective weights must be nonnegative");
    if (step_minutes <= 0.0)
        fail("step_minutes must be positive");
    if (prediction_steps < 2)
        fail("prediction_steps must be at least 2");
    if (schedule_steps < 0)
        fail("schedule_steps must be nonnegative");
    if (battery_kwh <= 0.0)
        fail("battery_kwh must be positive");
    if (price_eur_kwh < 0.0 || cycling_cost_eur_kwh < 0.0)
        fail("prices must be nonnegative");
    for (const double p : price_schedule)
        if (p < 0.0)
            fail("price_schedule entries must be nonnegative");
    if (fleet_size < 1)
        fail("fleet_size must be at least 1");
}

std::vector<Node> load_nodes(const std::string& path) {
    std::vector<std::string> columns;
    const auto rows = read_table(path, ',', columns);
    const int c_id = column_index(columns, "id", path);
    const int c_x = column_index(columns, "x", path);
    const int c_y = column_index(columns, "y", path);
    const int c_label = column_index(columns, "label", path);
    std::vector<Node> nodes;
    nodes.reserve(rows.size());
    for (const auto& r : rows) {
        Node n;
        n.id = static_cast<int>(parse_long(r[c_id], path));
        n.x = parse_double(r[c_x], path);
        n.y = parse_double(r[c_y], path);
        n.label = r[c_label];
        nodes.push_back(std::move(n));
    }
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id != static_cast<int>(i))
            throw ParseError(path + ": node ids must be unique and contiguous from 0, found id " +
                             std::to_string(nodes[i].id) + " at rank " + std::to_string(i));
    return nodes;
}

Network build_network(const std::vector<Node>& nodes, double speed_kmh,
                      double step_minutes) {
    if (nodes.size() < 2)
        throw std::invalid_argument("build_network: need at least two nodes");
    if (speed_kmh <= 0.0)
        throw std::invalid_argument("build_network: speed must be positive");
    if (step_minutes <= 0.0)
        throw std::invalid_argument("build_network: step length must be positive");
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXi steps = Eigen::MatrixXi::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double dx = nodes[i].x - nodes[j].x;
            const double dy = nodes[i].y - nodes[j].y;
            const double km = std::sqrt(dx * dx + dy * dy) / 1000.0;
            dist(i, j) = km;
            const double minutes = km / speed_kmh * 60.0;
            // Slack before ceil so ratios that are exact in real arithmetic
            // (6 km at 60 km/h on 6-minute steps) do not land on 2 steps.
            const int t = std::max(1, static_cast<int>(std::ceil(minutes / step_minutes - 1e-9)));
            steps(i, j) = t;
        }
    }
    return Network(nodes, std::move(steps), std::move(dist));
}

TripLoadResult load_trips(const std::string& path, const Network& net) {
    std::vector<std::string> columns;
    const auto rows = read_table(path, ',', columns);
    const int c_ox = column_index(columns, "origin_x", path);
    const int c_oy = column_index(columns, "origin_y", path);
    const int c_dx = column_index(columns, "dest_x", path);
    const int c_dy = column_index(columns, "dest_y", path);
    const int c_dep = column_index(columns, "departure_seconds", path);
    const int c_mode = column_index(columns, "mode", path);
    TripLoadResult out;
    int lineno = 1;
    for (const auto& r : rows) {
        ++lineno;
        std::string mode = r[c_mode];
        std::transform(mode.begin(), mode.end(), mode.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (mode == "walk" || mode == "walking") {
            ++out.dropped_walk;
            continue;
        }
        const std::string where = path + ":" + std::to_string(lineno);
        TripRecord t;
        t.origin = net.nearest(parse_double(r[c_ox], where), parse_double(r[c_oy], where));
        t.destination = net.nearest(parse_double(r[c_dx], where), parse_double(r[c_dy], where));
        t.departure_seconds = parse_double(r[c_dep], where);
        if (t.departure_seconds < 0.0)
            throw ParseError(where + ": negative departure time");
        if (t.origin == t.destination) {
            ++out.dropped_intra;
            continue;
        }
        out.trips.push_back(t);
    }
    if (out.trips.empty())
        throw ParseError(path + ": no usable trips after filtering");
    return out;
}

ValidationReport validate_scenario(const ModelParams& params, const Network& net,
                                   const OutageSchedule& outage) {
    params.validate();
    ValidationReport rep;
    auto warn = [&](const std::string& m) {
        rep.messages.push_back("warn: " + m);
        if (rep.status == ValidationStatus::Ok)
            rep.status = ValidationStatus::Warn;
    };
    auto fail = [&](const std::string& m) {
        rep.messages.push_back("fail: " + m);
        rep.status = ValidationStatus::Fail;
    };

    for (int i = 0; i < net.size(); ++i) {
        for (int j = 0; j < net.size(); ++j) {
            if (i == j)
                continue;
            if (net.travel_steps(i, j) >= params.prediction_steps) {
                rep.hazard_pairs.emplace_back(i, j);
                std::ostringstream ss;
                ss << "travel time " << net.travel_steps(i, j) << " steps from node " << i
                   << " to node " << j << " reaches the prediction horizon ("
                   << params.prediction_steps << "); trips between them cannot finish "
                   << "inside one planning window";
                warn(ss.str());
            }
        }
    }

    for (const auto& ev : outage.events) {
        if (ev.node < 0 || ev.node >= net.size())
            fail("outage event names node " + std::to_string(ev.node) + " outside the network");
        if (ev.start_step < 0 || ev.end_step <= ev.start_step)
            fail("outage event has an empty or negative step range");
        if (ev.end_step > params.schedule_steps)
            warn("outage event runs past the scheduling horizon and will be clipped");
    }
    if (!outage.empty()) {
        const double shortfall = outage.q_demand - outage.q_backup;
        const double fleet_cap = params.fleet_size * params.discharge_rate * params.v2b_efficiency;
        if (shortfall > fleet_cap) {
            std::ostringstream ss;
            ss << "building shortfall " << shortfall << " SOC/step exceeds the most the fleet "
               << "can deliver (" << fleet_cap << " = " << params.fleet_size << " vehicles x "
               << params.discharge_rate << " discharge x " << params.v2b_efficiency
               << " efficiency); every outage step is infeasible";
            fail(ss.str());
        }
        if (shortfall < 0.0)
            warn("generators already cover the building; outage steps impose no discharge");
    }
    return rep;
}

// Config parsing. The format is deliberately strict: every section and key
// must be one the loader knows, so a typo fails loudly instead of silently
// running defaults.

namespace {

struct RawConfig {
    // section -> key -> value, insertion order preserved for fingerprints
    std::map<std::string, std::map<std::string, std::string>> kv;

    void set(const std::string& section, const std::string& key, const std::string& value) {
        kv[section][key] = value;
    }
    const std::string* get(const std::string& section, const std::string& key) const {
        const auto s = kv.find(section);
        if (s == kv.end())
            return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }
};

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"network", {"nodes_file", "speed_kmh"}},
        {"params",
         {"soc_max", "soc_min", "soc_init", "drive_rate", "charge_rate", "discharge_rate",
          "v2b_efficiency", "relocation_weight", "energy_weight", "step_minutes",
          "prediction_steps", "schedule_steps", "battery_kwh", "price_eur_kwh",
          "price_schedule", "cycling_cost_eur_kwh", "fleet_size"}},
        {"demand", {"mode", "trips_file", "arrivals_file", "bucket_minutes", "passenger_target"}},
        {"fleet", {"placement", "positions"}},
        {"outage", {"events", "q_demand", "q_backup"}},
    };
    return k;
}

void check_known(const std::string& section, const std::string& key, const std::string& where) {
    const auto& reg = known_keys();
    const auto s = reg.find(section);
    if (s == reg.end())
        throw ParseError(where + ": unknown section [" + section + "]");
    if (!s->second.count(key))
        throw ParseError(where + ": unknown key '" + key + "' in section [" + section + "]");
}

RawConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open scenario config: " + path);
    RawConfig raw;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);
        std::string s = line;
        const auto hash = s.find('#');
        if (hash != std::string::npos)
            s = s.substr(0, hash);
        s = trim(s);
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ParseError(where + ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (!known_keys().count(section))
                throw ParseError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ParseError(where + ": expected key = value");
        if (section.empty())
            throw ParseError(where + ": key outside any [section]");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        check_known(section, key, where);
        raw.set(section, key, value);
    }
    return raw;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& where) {
    std::vector<double> out;
    for (const auto& tok : split(s, ','))
        if (!tok.empty())
            out.push_back(parse_double(tok, where));
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& where) {
    std::vector<int> out;
    for (const auto& tok : split(s, ','))
        if (!tok.empty())
            out.push_back(static_cast<int>(parse_long(tok, where)));
    return out;
}

// events syntax: "node:start:end" items separated by ';'
std::vector<OutageEvent> parse_events(const std::string& s, const std::string& where) {
    std::vector<OutageEvent> out;
    for (const auto& item : split(s, ';')) {
        if (item.empty())
            continue;
        const auto parts = split(item, ':');
        if (parts.size() != 3)
            throw ParseError(where + ": outage event must be node:start:end, got '" + item + "'");
        OutageEvent ev;
        ev.node = static_cast<int>(parse_long(parts[0], where));
        ev.start_step = static_cast<int>(parse_long(parts[1], where));
        ev.end_step = static_cast<int>(parse_long(parts[2], where));
        out.push_back(ev);
    }
    return out;
}

std::string resolve_path(const std::string& dir, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute())
        return rel;
    return (std::filesystem::path(dir) / p).string();
}

Scenario build_scenario(const RawConfig& raw, const std::string& config_dir) {
    Scenario sc;
    sc.config_dir = config_dir;

    const std::string* nodes_file = raw.get("network", "nodes_file");
    if (!nodes_file)
        throw ParseError("scenario config: [network] nodes_file is required");
    if (const auto* v = raw.get("network", "speed_kmh"))
        sc.speed_kmh = parse_double(*v, "network.speed_kmh");

    auto getd = [&](const char* key, double& dst) {
        if (const auto* v = raw.get("params", key))
            dst = parse_double(*v, std::string("params.") + key);
    };
    auto geti = [&](const char* key, int& dst) {
        if (const auto* v = raw.get("params", key))
            dst = static_cast<int>(parse_long(*v, std::string("params.") + key));
    };
    ModelParams& p = sc.params;
    getd("soc_max", p.soc_max);
    getd("soc_min", p.soc_min);
    getd("soc_init", p.soc_init);
    getd("drive_rate", p.drive_rate);
    getd("charge_rate", p.charge_rate);
    getd("discharge_rate", p.discharge_rate);
    getd("v2b_efficiency", p.v2b_efficiency);
    getd("relocation_weight", p.relocation_weight);
    getd("energy_weight", p.energy_weight);
    getd("step_minutes", p.step_minutes);
    geti("prediction_steps", p.prediction_steps);
    geti("schedule_steps", p.schedule_steps);
    getd("battery_kwh", p.battery_kwh);
    getd("price_eur_kwh", p.price_eur_kwh);
    getd("cycling_cost_eur_kwh", p.cycling_cost_eur_kwh);
    geti("fleet_size", p.fleet_size);
    if (const auto* v = raw.get("params", "price_schedule"))
        p.price_schedule = parse_double_list(*v, "params.price_schedule");

    if (const auto* v = raw.get("demand", "mode")) {
        if (*v == "sample")
            sc.demand.mode = DemandMode::Sample;
        else if (*v == "replay")
            sc.demand.mode = DemandMode::Replay;
        else if (*v == "file")
            sc.demand.mode = DemandMode::File;
        else
            throw ParseError("demand.mode must be sample, replay or file, got '" + *v + "'");
    }
    if (const auto* v = raw.get("demand", "trips_file"))
        sc.demand.trips_file = resolve_path(config_dir, *v);
    if (const auto* v = raw.get("demand", "arrivals_file"))
        sc.demand.arrivals_file = resolve_path(config_dir, *v);
    if (const auto* v = raw.get("demand", "bucket_minutes"))
        sc.demand.bucket_minutes = static_cast<int>(parse_long(*v, "demand.bucket_minutes"));
    if (const auto* v = raw.get("demand", "passenger_target"))
        sc.demand.passenger_target = parse_double(*v, "demand.passenger_target");

    if (const auto* v = raw.get("fleet", "placement")) {
        if (*v == "uniform")
            sc.fleet.placement = PlacementPolicy::Uniform;
        else if (*v == "demand_weighted")
            sc.fleet.placement = PlacementPolicy::DemandWeighted;
        else if (*v == "explicit")
            sc.fleet.placement = PlacementPolicy::Explicit;
        else
            throw ParseError("fleet.placement must be uniform, demand_weighted or explicit, got '" +
                             *v + "'");
    }
    if (const auto* v = raw.get("fleet", "positions"))
        sc.fleet.positions = parse_int_list(*v, "fleet.positions");

    if (const auto* v = raw.get("outage", "events"))
        sc.outage.events = parse_events(*v, "outage.events");
    if (const auto* v = raw.get("outage", "q_demand"))
        sc.outage.q_demand = parse_double(*v, "outage.q_demand");
    if (const auto* v = raw.get("outage", "q_backup"))
        sc.outage.q_backup = parse_double(*v, "outage.q_backup");

    p.validate();
    if (sc.demand.bucket_minutes <= 0)
        throw ParseError("demand.bucket_minutes must be positive");
    const double steps_per_bucket = sc.demand.bucket_minutes / p.step_minutes;
    if (std::abs(steps_per_bucket - std::round(steps_per_bucket)) > 1e-9)
        throw ParseError("demand.bucket_minutes must be a whole number of steps");
    if (sc.demand.mode != DemandMode::File && sc.demand.trips_file.empty())
        throw ParseError("demand.trips_file is required for sample and replay modes");
    if (sc.demand.mode == DemandMode::File && sc.demand.arrivals_file.empty())
        throw ParseError("demand.arrivals_file is required for file mode");

    const auto nodes = load_nodes(resolve_path(config_dir, *nodes_file));
    sc.network = build_network(nodes, sc.speed_kmh, p.step_minutes);

    if (sc.fleet.placement == PlacementPolicy::Explicit) {
        if (static_cast<int>(sc.fleet.positions.size()) != p.fleet_size)
            throw ParseError("fleet.positions must list one node per vehicle (" +
                             std::to_string(p.fleet_size) + " expected, " +
                             std::to_string(sc.fleet.positions.size()) + " given)");
        for (const int pos : sc.fleet.positions)
            if (pos < 0 || pos >= sc.network.size())
                throw ParseError("fleet.positions names node " + std::to_string(pos) +
                                 " outside the network");
    }
    return sc;
}

void split_assignment(const std::string& assignment, std::string& section, std::string& key,
                      std::string& value) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ParseError("override must be section.key=value, got '" + assignment + "'");
    const std::string lhs = trim(assignment.substr(0, eq));
    value = trim(assignment.substr(eq + 1));
    const auto dot = lhs.find('.');
    if (dot == std::string::npos)
        throw ParseError("override must be section.key=value, got '" + assignment + "'");
    section = lhs.substr(0, dot);
    key = lhs.substr(dot + 1);
    check_known(section, key, "override '" + assignment + "'");
}

} // namespace

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    RawConfig raw = read_config_file(path);
    for (const auto& ov : overrides) {
        std::string section, key, value;
        split_assignment(ov, section, key, value);
        raw.set(section, key, value);
    }
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return build_scenario(raw, dir.empty() ? "." : dir);
}

void apply_override(Scenario& sc, const std::string& assignment) {
    std::string section, key, value;
    split_assignment(assignment, section, key, value);
    const std::string where = "override " + section + "." + key;
    if (section == "network")
        throw ParseError(where + ": network settings cannot be overridden after load");
    if (section == "params") {
        ModelParams& p = sc.params;
        if (key == "soc_max") p.soc_max = parse_double(value, where);
        else if (key == "soc_min") p.soc_min = parse_double(value, where);
        else if (key == "soc_init") p.soc_init = parse_double(value, where);
        else if (key == "drive_rate") p.drive_rate = parse_double(value, where);
        else if (key == "charge_rate") p.charge_rate = parse_double(value, where);
        else if (key == "discharge_rate") p.discharge_rate = parse_double(value, where);
        else if (key == "v2b_efficiency") p.v2b_efficiency = parse_double(value, where);
        else if (key == "relocation_weight") p.relocation_weight = parse_double(value, where);
        else if (key == "energy_weight") p.energy_weight = parse_double(value, where);
        else if (key == "step_minutes") throw ParseError(where + ": step length is fixed by the network build");
        else if (key == "prediction_steps") p.prediction_steps = static_cast<int>(parse_long(value, where));
        else if (key == "schedule_steps") p.schedule_steps = static_cast<int>(parse_long(value, where));
        else if (key == "battery_kwh") p.battery_kwh = parse_double(value, where);
        else if (key == "price_eur_kwh") p.price_eur_kwh = parse_double(value, where);
        else if (key == "price_schedule") p.price_schedule = parse_double_list(value, where);
        else if (key == "cycling_cost_eur_kwh") p.cycling_cost_eur_kwh = parse_double(value, where);
        else if (key == "fleet_size") p.fleet_size = static_cast<int>(parse_long(value, where));
        p.validate();
        return;
    }
    if (section == "demand") {
        if (key == "passenger_target") {
            sc.demand.passenger_target = parse_double(value, where);
            return;
        }
        throw ParseError(where + ": only passenger_target can be overridden after load");
    }
    if (section == "fleet")
        throw ParseError(where + ": fleet settings cannot be overridden after load");
    if (section == "outage") {
        if (key == "events") sc.outage.events = parse_events(value, where);
        else if (key == "q_demand") sc.outage.q_demand = parse_double(value, where);
        else if (key == "q_backup") sc.outage.q_backup = parse_double(value, where);
        return;
    }
    throw ParseError(where + ": unknown section");
}

namespace {

void hash_params(std::ostringstream& ss, const Scenario& sc) {
    const ModelParams& p = sc.params;
    ss << "params:" << p.soc_max << ',' << p.soc_min << ',' << p.soc_init << ',' << p.drive_rate
       << ',' << p.charge_rate << ',' << p.discharge_rate << ',' << p.v2b_efficiency << ','
       << p.relocation_weight << ',' << p.energy_weight << ',' << p.step_minutes << ','
       << p.prediction_steps << ',' << p.schedule_steps << ',' << p.battery_kwh << ','
       << p.price_eur_kwh << ',' << p.cycling_cost_eur_kwh << ',' << p.fleet_size << '\n';
    ss << "prices:";
    for (const double v : p.price_schedule)
        ss << v << ',';
    ss << '\n';
    ss << "network:" << sc.speed_kmh << ';';
    for (const auto& n : sc.network.nodes())
        ss << n.id << ',' << n.x << ',' << n.y << ';';
    ss << '\n';
    ss << "demand:" << static_cast<int>(sc.demand.mode) << ',' << sc.demand.bucket_minutes << ','
       << sc.demand.passenger_target << '\n';
    ss << "fleet:" << static_cast<int>(sc.fleet.placement) << ';';
    for (const int pos : sc.fleet.positions)
        ss << pos << ',';
    ss << '\n';
    if (!sc.demand.trips_file.empty())
        ss << "trips_hash:" << fnv1a(read_file(sc.demand.trips_file)) << '\n';
    if (!sc.demand.arrivals_file.empty())
        ss << "arrivals_hash:" << fnv1a(read_file(sc.demand.arrivals_file)) << '\n';
}

} // namespace

std::uint64_t Scenario::base_fingerprint() const {
    std::ostringstream ss;
    hash_params(ss, *this);
    return fnv1a(ss.str());
}

std::uint64_t Scenario::full_fingerprint() const {
    std::ostringstream ss;
    hash_params(ss, *this);
    ss << "outage:" << outage.q_demand << ',' << outage.q_backup << ';';
    for (const auto& ev : outage.events)
        ss << ev.node << ',' << ev.start_step << ',' << ev.end_step << ';';
    ss << '\n';
    return fnv1a(ss.str());
}

} // namespace saev
