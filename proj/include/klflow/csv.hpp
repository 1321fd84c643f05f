#pragma once

#include "klflow/certificate.hpp"
#include "klflow/flow.hpp"
#include "klflow/prox.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace klflow {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// Header `t,x_1..x_n,f,slope,speed,segment`.
std::string trajectory_csv(const Trajectory& traj);
/// Header `k,x_1..x_n,f,dist_step,slope,de_giorgi_residual`.
std::string sequence_csv(const ProxSequence& seq);
/// Header `k,observed,bound,margin`.
std::string recursion_csv(const std::vector<RecursionRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Writes `<label>_observed.csv` and `<label>_bound.csv` for every evaluated
/// certificate into dir and returns the written paths. Throws std::invalid_argument
/// on an empty certificate list.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<RateCertificate>& certs,
                                                  const std::filesystem::path& dir);

}  // namespace klflow
