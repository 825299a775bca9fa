#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "trajopt/types.hpp"

namespace trajopt {

// External simulator executable speaking the line protocol: request
// {"x": [numbers], "seed": integer} on stdin, response
// {"t": [integers], "outputs": {"name": [numbers], ...}} on stdout, one line
// each. Each call owns its child process exclusively.
struct PluginHandle {
  std::string path;
  double timeout_seconds = 60.0;
};

// Runs the plugin once. Throws SimulatorError (carrying the raw payload) on
// crash, nonzero exit, malformed response, or timeout. Repeated calls with
// identical (x, seed) are expected to return identical trajectories; that
// contract is the plugin's to keep.
Trajectory external_simulate(const PluginHandle& plugin,
                             const Eigen::VectorXd& x, std::int64_t seed);

// Request/response codecs, shared with the CLI's plugin-serving mode.
std::string encode_plugin_request(const Eigen::VectorXd& x, std::int64_t seed);
bool decode_plugin_request(const std::string& line, Eigen::VectorXd* x,
                           std::int64_t* seed);
std::string encode_plugin_response(const Trajectory& trajectory);
Trajectory decode_plugin_response(const std::string& line,
                                  const Eigen::VectorXd& x, std::int64_t seed);

}  // namespace trajopt
