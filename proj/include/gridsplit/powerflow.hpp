#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gridsplit/network.hpp"

namespace gridsplit {

using Complex = std::complex<double>;

// Complex power entering the branch at each terminal, MVA.
struct BranchFlow {
    Complex s_from;
    Complex s_to;

    double max_apparent() const;
};

struct PowerFlowOptions {
    double tolerance = 1e-6;  // p.u. on the largest |dP|, |dQ|
    int max_iterations = 50;
    bool enforce_q_limits = false;
    int divergence_window = 3;  // consecutive growing mismatches before giving up
};

struct IterationTrace {
    int iteration = 0;
    double max_mismatch_pu = 0.0;
};

struct PowerFlowSolution {
    std::vector<BusId> bus_ids;  // solved buses, in case order
    std::vector<double> v_mag;
    std::vector<double> v_ang;
    // Indexed by BranchIndex; empty for branches outside the subnetwork or out
    // of service. HVDC links report their fixed transfer.
    std::vector<std::optional<BranchFlow>> flows;
    BusId slack_bus = 0;
    Complex slack_injection;  // MW + jMVAr delivered by generation at the slack bus
    bool converged = false;
    // Newton passes including the final mismatch evaluation, so a flat start
    // that is already exact reports 1.
    int iterations = 0;
    double max_mismatch = 0.0;  // MW / MVAr
    std::vector<IterationTrace> trace;
    std::vector<BusId> switched_to_pq;  // PV buses converted by Q-limit enforcement
};

// Polar mismatch model for one electrically connected subnetwork. State is
// (angles of non-slack buses, magnitudes of PQ buses).
class PowerFlowModel {
  public:
    PowerFlowModel(const NetworkCase& network, std::span<const BusId> subnetwork);

    std::size_t bus_count() const { return bus_ids_.size(); }
    const std::vector<BusId>& bus_ids() const { return bus_ids_; }
    std::size_t slack_position() const { return slack_; }
    const Eigen::SparseMatrix<Complex>& admittance() const { return ybus_; }

    // Scheduled injections, p.u.
    const Eigen::VectorXcd& scheduled() const { return scheduled_; }

    // Initial voltage: flat angles; slack and PV at setpoint, PQ at 1.0.
    Eigen::VectorXcd initial_voltage() const;

    // Stacked [dP(pv, pq); dQ(pq)] for the given voltage, p.u.
    Eigen::VectorXd mismatch(const Eigen::VectorXcd& voltage) const;
    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXcd& voltage) const;

    std::size_t state_size() const { return pvpq_.size() + pq_.size(); }
    Eigen::VectorXcd apply_update(const Eigen::VectorXcd& voltage, const Eigen::VectorXd& dx) const;

    // Turns a PV bus into PQ with a fixed reactive injection (p.u.).
    void convert_pv_to_pq(std::size_t position, double q_injection);
    bool is_pv(std::size_t position) const;

    Eigen::VectorXcd injections(const Eigen::VectorXcd& voltage) const;

  private:
    void classify();

    std::vector<BusId> bus_ids_;
    std::vector<BusKind> kinds_;
    std::size_t slack_ = 0;
    std::vector<std::size_t> pvpq_;
    std::vector<std::size_t> pq_;
    Eigen::SparseMatrix<Complex> ybus_;
    Eigen::VectorXcd scheduled_;
    Eigen::VectorXd v_setpoint_;
    double slack_angle_ = 0.0;
};

// Newton-Raphson AC power flow over `subnetwork` (whole case when empty).
// Non-convergence returns the best iterate with converged == false; missing
// slack, disconnection and a singular Jacobian throw.
PowerFlowSolution solve(const NetworkCase& network, std::span<const BusId> subnetwork = {},
                        const PowerFlowOptions& options = {});

// Pi-model flows with off-nominal tap on the from side. Rejects unconverged
// solutions.
std::vector<std::optional<BranchFlow>> branch_flows(const PowerFlowSolution& solution,
                                                    const NetworkCase& network);

// Flows implied by the voltages stored in the case itself (pre-solved cases).
std::vector<std::optional<BranchFlow>> case_state_flows(const NetworkCase& network);

BranchFlow pi_model_flow(const Branch& branch, Complex v_from, Complex v_to, double base_mva);

}  // namespace gridsplit
