#include "gridsplit/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/SparseLU>

#include "gridsplit/error.hpp"

namespace gridsplit {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
const Complex j_unit{0.0, 1.0};

}  // namespace

double BranchFlow::max_apparent() const { return std::max(std::abs(s_from), std::abs(s_to)); }

BranchFlow pi_model_flow(const Branch& branch, Complex v_from, Complex v_to, double base_mva) {
    if (branch.is_hvdc) {
        return {Complex(branch.dc_setpoint_mw, 0.0), Complex(-branch.dc_setpoint_mw, 0.0)};
    }
    const Complex ys = 1.0 / Complex(branch.r, branch.x);
    const Complex ytt = ys + Complex(0.0, branch.b_shunt / 2.0);
    const Complex yff = ytt / (branch.tap * branch.tap);
    const Complex yft = -ys / branch.tap;
    const Complex i_from = yff * v_from + yft * v_to;
    const Complex i_to = yft * v_from + ytt * v_to;
    return {v_from * std::conj(i_from) * base_mva, v_to * std::conj(i_to) * base_mva};
}

PowerFlowModel::PowerFlowModel(const NetworkCase& network, std::span<const BusId> subnetwork) {
    const auto positions = bus_positions(network);
    std::unordered_set<BusId> members;
    if (subnetwork.empty()) {
        for (const auto& bus : network.buses) members.insert(bus.id);
    } else {
        for (BusId id : subnetwork) {
            if (!positions.contains(id)) {
                throw Error(ErrorKind::invalid_argument, "subnetwork references undefined bus " + std::to_string(id));
            }
            members.insert(id);
        }
    }
    if (members.empty()) throw Error(ErrorKind::invalid_argument, "empty subnetwork");

    std::unordered_map<BusId, std::size_t> local;
    for (const auto& bus : network.buses) {
        if (!members.contains(bus.id)) continue;
        local.emplace(bus.id, bus_ids_.size());
        bus_ids_.push_back(bus.id);
        kinds_.push_back(bus.kind);
    }
    const std::size_t n = bus_ids_.size();

    std::vector<BusId> slacks;
    for (std::size_t i = 0; i < n; ++i) {
        if (kinds_[i] == BusKind::slack) slacks.push_back(bus_ids_[i]);
    }
    if (slacks.size() != 1) {
        throw Error(ErrorKind::validation, slacks.empty()
                                               ? "subnetwork has no slack bus"
                                               : "subnetwork has " + std::to_string(slacks.size()) +
                                                     " slack buses (need exactly 1)");
    }
    slack_ = local.at(slacks.front());

    std::vector<bool> has_generator(n, false);
    for (const auto& gen : network.generators) {
        if (gen.in_service && local.contains(gen.bus)) has_generator[local.at(gen.bus)] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (kinds_[i] == BusKind::pv && !has_generator[i]) kinds_[i] = BusKind::pq;
    }

    // Connectivity over in-service AC branches inside the subnetwork.
    std::vector<std::vector<std::size_t>> adjacency(n);
    std::vector<Eigen::Triplet<Complex>> entries;
    for (const auto& br : network.branches) {
        if (!br.in_service || br.is_hvdc) continue;
        const auto f = local.find(br.from_bus);
        const auto t = local.find(br.to_bus);
        if (f == local.end() || t == local.end()) continue;
        adjacency[f->second].push_back(t->second);
        adjacency[t->second].push_back(f->second);
        const Complex ys = 1.0 / Complex(br.r, br.x);
        const Complex ytt = ys + Complex(0.0, br.b_shunt / 2.0);
        const Complex yff = ytt / (br.tap * br.tap);
        const Complex yft = -ys / br.tap;
        entries.emplace_back(f->second, f->second, yff);
        entries.emplace_back(t->second, t->second, ytt);
        entries.emplace_back(f->second, t->second, yft);
        entries.emplace_back(t->second, f->second, yft);
    }
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    frontier.push(slack_);
    seen[slack_] = true;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (auto v : adjacency[u]) {
            if (!seen[v]) {
                seen[v] = true;
                frontier.push(v);
            }
        }
    }
    if (const auto it = std::ranges::find(seen, false); it != seen.end()) {
        throw Error(ErrorKind::validation,
                    "subnetwork is disconnected: bus " +
                        std::to_string(bus_ids_[static_cast<std::size_t>(it - seen.begin())]) +
                        " is not reachable from the slack");
    }

    const double base = network.base_mva;
    for (const auto& sh : network.shunts) {
        if (const auto it = local.find(sh.bus); it != local.end()) {
            entries.emplace_back(it->second, it->second, Complex(sh.g_mw, sh.b_mvar) / base);
        }
    }
    ybus_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    ybus_.setFromTriplets(entries.begin(), entries.end());
    ybus_.makeCompressed();

    scheduled_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& gen : network.generators) {
        if (!gen.in_service) continue;
        if (const auto it = local.find(gen.bus); it != local.end()) {
            scheduled_[static_cast<Eigen::Index>(it->second)] += Complex(gen.p_gen, gen.q_gen) / base;
        }
    }
    for (const auto& load : network.loads) {
        if (const auto it = local.find(load.bus); it != local.end()) {
            scheduled_[static_cast<Eigen::Index>(it->second)] -= Complex(load.p_load, load.q_load) / base;
        }
    }
    for (const auto& br : network.branches) {
        if (!br.in_service || !br.is_hvdc) continue;
        if (const auto f = local.find(br.from_bus); f != local.end()) {
            scheduled_[static_cast<Eigen::Index>(f->second)] -= br.dc_setpoint_mw / base;
        }
        if (const auto t = local.find(br.to_bus); t != local.end()) {
            scheduled_[static_cast<Eigen::Index>(t->second)] += br.dc_setpoint_mw / base;
        }
    }

    v_setpoint_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    const auto slack_bus = positions.at(bus_ids_[slack_]);
    slack_angle_ = network.buses[slack_bus].v_ang;
    for (std::size_t i = 0; i < n; ++i) {
        if (kinds_[i] != BusKind::pq) {
            v_setpoint_[static_cast<Eigen::Index>(i)] = network.buses[positions.at(bus_ids_[i])].v_mag;
        }
    }
    classify();
}

void PowerFlowModel::classify() {
    pvpq_.clear();
    pq_.clear();
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
        if (kinds_[i] == BusKind::pv) pvpq_.push_back(i);
    }
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
        if (kinds_[i] == BusKind::pq) {
            pvpq_.push_back(i);
            pq_.push_back(i);
        }
    }
}

bool PowerFlowModel::is_pv(std::size_t position) const { return kinds_.at(position) == BusKind::pv; }

void PowerFlowModel::convert_pv_to_pq(std::size_t position, double q_injection) {
    if (!is_pv(position)) throw Error(ErrorKind::invalid_argument, "bus is not PV");
    kinds_[position] = BusKind::pq;
    auto& s = scheduled_[static_cast<Eigen::Index>(position)];
    s = Complex(s.real(), q_injection);
    classify();
}

Eigen::VectorXcd PowerFlowModel::initial_voltage() const {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(bus_count()));
    for (std::size_t i = 0; i < bus_count(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        v[k] = i == slack_ ? std::polar(v_setpoint_[k], slack_angle_) : Complex(v_setpoint_[k], 0.0);
    }
    return v;
}

Eigen::VectorXcd PowerFlowModel::injections(const Eigen::VectorXcd& voltage) const {
    const Eigen::VectorXcd current = ybus_ * voltage;
    return voltage.cwiseProduct(current.conjugate());
}

Eigen::VectorXd PowerFlowModel::mismatch(const Eigen::VectorXcd& voltage) const {
    const Eigen::VectorXcd f = injections(voltage) - scheduled_;
    Eigen::VectorXd out(static_cast<Eigen::Index>(state_size()));
    Eigen::Index row = 0;
    for (auto i : pvpq_) out[row++] = f[static_cast<Eigen::Index>(i)].real();
    for (auto i : pq_) out[row++] = f[static_cast<Eigen::Index>(i)].imag();
    return out;
}

Eigen::SparseMatrix<double> PowerFlowModel::jacobian(const Eigen::VectorXcd& voltage) const {
    const std::size_t n = bus_count();
    std::vector<std::size_t> angle_index(n, npos);
    std::vector<std::size_t> magnitude_index(n, npos);
    for (std::size_t r = 0; r < pvpq_.size(); ++r) angle_index[pvpq_[r]] = r;
    for (std::size_t r = 0; r < pq_.size(); ++r) magnitude_index[pq_[r]] = pvpq_.size() + r;

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(ybus_.nonZeros()) * 4 + n * 4);
    // dS_i/dtheta_k and dS_i/d|V_k|; rows with real part are P equations
    // (pvpq), imaginary part Q equations (pq).
    auto add = [&](std::size_t i, std::size_t k, Complex d_angle, Complex d_mag) {
        const auto p_row = angle_index[i];
        const auto q_row = magnitude_index[i];
        const auto a_col = angle_index[k];
        const auto m_col = magnitude_index[k];
        auto push = [&entries](std::size_t r, std::size_t c, double v) {
            entries.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
        };
        if (p_row != npos && a_col != npos) push(p_row, a_col, d_angle.real());
        if (p_row != npos && m_col != npos) push(p_row, m_col, d_mag.real());
        if (q_row != npos && a_col != npos) push(q_row, a_col, d_angle.imag());
        if (q_row != npos && m_col != npos) push(q_row, m_col, d_mag.imag());
    };

    const Eigen::VectorXcd current = ybus_ * voltage;
    for (Eigen::Index k = 0; k < ybus_.outerSize(); ++k) {
        const Complex vk = voltage[k];
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(ybus_, k); it; ++it) {
            const auto i = static_cast<std::size_t>(it.row());
            const Complex vi = voltage[it.row()];
            const Complex yv = it.value() * vk;
            add(i, static_cast<std::size_t>(k), -j_unit * vi * std::conj(yv), vi * std::conj(yv / std::abs(vk)));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const Complex vi = voltage[k];
        add(i, i, j_unit * vi * std::conj(current[k]), std::conj(current[k]) * vi / std::abs(vi));
    }
    const auto size = static_cast<Eigen::Index>(state_size());
    Eigen::SparseMatrix<double> jac(size, size);
    jac.setFromTriplets(entries.begin(), entries.end());
    jac.makeCompressed();
    return jac;
}

Eigen::VectorXcd PowerFlowModel::apply_update(const Eigen::VectorXcd& voltage, const Eigen::VectorXd& dx) const {
    Eigen::VectorXd angle = voltage.unaryExpr([](Complex v) { return std::arg(v); }).real();
    Eigen::VectorXd magnitude = voltage.cwiseAbs();
    Eigen::Index row = 0;
    for (auto i : pvpq_) angle[static_cast<Eigen::Index>(i)] += dx[row++];
    for (auto i : pq_) magnitude[static_cast<Eigen::Index>(i)] += dx[row++];
    Eigen::VectorXcd out(voltage.size());
    for (Eigen::Index i = 0; i < voltage.size(); ++i) out[i] = std::polar(magnitude[i], angle[i]);
    return out;
}

namespace {

struct NewtonResult {
    Eigen::VectorXcd voltage;
    bool converged = false;
    double norm = 0.0;
};

std::vector<std::optional<BranchFlow>> flows_from_voltages(const NetworkCase& network,
                                                           const PowerFlowSolution& solution) {
    std::unordered_map<BusId, Complex> voltage;
    for (std::size_t i = 0; i < solution.bus_ids.size(); ++i) {
        voltage.emplace(solution.bus_ids[i], std::polar(solution.v_mag[i], solution.v_ang[i]));
    }
    std::vector<std::optional<BranchFlow>> flows(network.branches.size());
    for (std::size_t b = 0; b < network.branches.size(); ++b) {
        const auto& br = network.branches[b];
        if (!br.in_service) continue;
        const auto f = voltage.find(br.from_bus);
        const auto t = voltage.find(br.to_bus);
        if (f == voltage.end() || t == voltage.end()) continue;
        flows[b] = pi_model_flow(br, f->second, t->second, network.base_mva);
    }
    return flows;
}

NewtonResult newton(const PowerFlowModel& model, Eigen::VectorXcd voltage, const PowerFlowOptions& options,
                    PowerFlowSolution& solution) {
    NewtonResult best{voltage, false, std::numeric_limits<double>::infinity()};
    double previous = std::numeric_limits<double>::infinity();
    int growing = 0;
    for (int pass = 1;; ++pass) {
        const Eigen::VectorXd f = model.mismatch(voltage);
        const double norm = f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
        ++solution.iterations;
        solution.trace.push_back({solution.iterations, norm});
        if (!std::isfinite(norm)) break;
        if (norm < best.norm) best = {voltage, false, norm};
        if (norm < options.tolerance) {
            best.converged = true;
            break;
        }
        growing = norm > previous ? growing + 1 : 0;
        previous = norm;
        if (growing >= options.divergence_window || pass >= options.max_iterations) break;

        const auto jac = model.jacobian(voltage);
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(jac);
        lu.factorize(jac);
        if (lu.info() != Eigen::Success) {
            throw Error(ErrorKind::numerical,
                        "singular Jacobian at iteration " + std::to_string(solution.iterations));
        }
        const Eigen::VectorXd dx = lu.solve(-f);
        if (!dx.allFinite()) {
            throw Error(ErrorKind::numerical,
                        "singular Jacobian at iteration " + std::to_string(solution.iterations));
        }
        voltage = model.apply_update(voltage, dx);
    }
    return best;
}

}  // namespace

PowerFlowSolution solve(const NetworkCase& network, std::span<const BusId> subnetwork,
                        const PowerFlowOptions& options) {
    if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
        throw Error(ErrorKind::invalid_argument, "power-flow tolerance and iteration cap must be positive");
    }
    PowerFlowModel model(network, subnetwork);
    const double base = network.base_mva;
    const std::size_t n = model.bus_count();

    // Non-generator part of each scheduled injection (loads, HVDC), p.u.
    Eigen::VectorXcd fixed = model.scheduled();
    std::vector<double> q_min(n, 0.0), q_max(n, 0.0);
    {
        std::unordered_map<BusId, std::size_t> local;
        for (std::size_t i = 0; i < n; ++i) local.emplace(model.bus_ids()[i], i);
        for (const auto& gen : network.generators) {
            if (!gen.in_service) continue;
            if (const auto it = local.find(gen.bus); it != local.end()) {
                fixed[static_cast<Eigen::Index>(it->second)] -= Complex(gen.p_gen, gen.q_gen) / base;
                q_min[it->second] += gen.q_min / base;
                q_max[it->second] += gen.q_max / base;
            }
        }
    }

    PowerFlowSolution solution;
    solution.bus_ids = model.bus_ids();
    solution.slack_bus = model.bus_ids()[model.slack_position()];

    auto result = newton(model, model.initial_voltage(), options, solution);
    if (options.enforce_q_limits) {
        for (std::size_t round = 0; round < n && result.converged; ++round) {
            const Eigen::VectorXcd s = model.injections(result.voltage);
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!model.is_pv(i)) continue;
                // Generator reactive output = net injection minus fixed part.
                const double q_gen = s[static_cast<Eigen::Index>(i)].imag() - fixed[static_cast<Eigen::Index>(i)].imag();
                const double limit = q_gen > q_max[i] ? q_max[i] : q_gen < q_min[i] ? q_min[i] : q_gen;
                if (limit != q_gen) {
                    model.convert_pv_to_pq(i, limit + fixed[static_cast<Eigen::Index>(i)].imag());
                    solution.switched_to_pq.push_back(model.bus_ids()[i]);
                    changed = true;
                }
            }
            if (!changed) break;
            result = newton(model, result.voltage, options, solution);
        }
    }

    solution.converged = result.converged;
    solution.max_mismatch = result.norm * base;
    solution.v_mag.resize(n);
    solution.v_ang.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        solution.v_mag[i] = std::abs(result.voltage[static_cast<Eigen::Index>(i)]);
        solution.v_ang[i] = std::arg(result.voltage[static_cast<Eigen::Index>(i)]);
    }
    const auto slack = static_cast<Eigen::Index>(model.slack_position());
    solution.slack_injection = (model.injections(result.voltage)[slack] - fixed[slack]) * base;

    solution.flows = flows_from_voltages(network, solution);
    return solution;
}

std::vector<std::optional<BranchFlow>> branch_flows(const PowerFlowSolution& solution, const NetworkCase& network) {
    if (!solution.converged) throw Error(ErrorKind::numerical, "branch flows requested from an unconverged solution");
    return flows_from_voltages(network, solution);
}

std::vector<std::optional<BranchFlow>> case_state_flows(const NetworkCase& network) {
    const auto positions = bus_positions(network);
    std::vector<std::optional<BranchFlow>> flows(network.branches.size());
    for (std::size_t b = 0; b < network.branches.size(); ++b) {
        const auto& br = network.branches[b];
        if (!br.in_service) continue;
        const auto& f = network.buses.at(positions.at(br.from_bus));
        const auto& t = network.buses.at(positions.at(br.to_bus));
        flows[b] = pi_model_flow(br, std::polar(f.v_mag, f.v_ang), std::polar(t.v_mag, t.v_ang), network.base_mva);
    }
    return flows;
}

}  // namespace gridsplit
