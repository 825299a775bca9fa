#include "trajopt/plugin.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include <json.hpp>

namespace trajopt {

namespace {

using nlohmann::json;

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct ChildResult {
  std::string stdout_text;
  int exit_status = -1;
  bool timed_out = false;
};

ChildResult run_child(const std::string& path, const std::string& request,
                      double timeout_seconds) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw SimulatorError("plugin: pipe() failed", "");
  }

  const pid_t pid = ::fork();
  if (pid < 0) throw SimulatorError("plugin: fork() failed", "");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl(path.c_str(), path.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);

  ChildResult result;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_seconds);

  // Send the one-line request, then close stdin so well-behaved plugins
  // terminate on EOF.
  const std::string line = request + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n =
        ::write(to_child[1], line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // child may have exited already; its output tells the story
    }
    written += static_cast<std::size_t>(n);
  }
  ::close(to_child[1]);

  char buf[4096];
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    const int remaining_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
            .count());
    struct pollfd pfd = {from_child[0], POLLIN, 0};
    const int pr = ::poll(&pfd, 1, std::max(1, remaining_ms));
    if (pr < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (pr == 0) {
      result.timed_out = true;
      break;
    }
    const ssize_t n = ::read(from_child[0], buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;  // EOF
    result.stdout_text.append(buf, static_cast<std::size_t>(n));
  }
  ::close(from_child[0]);

  if (result.timed_out) {
    ::kill(pid, SIGKILL);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  if (WIFEXITED(status)) {
    result.exit_status = WEXITSTATUS(status);
  } else {
    result.exit_status = -1;
  }
  return result;
}

}  // namespace

std::string encode_plugin_request(const Eigen::VectorXd& x,
                                  std::int64_t seed) {
  json req;
  req["x"] = std::vector<double>(x.data(), x.data() + x.size());
  req["seed"] = seed;
  return req.dump();
}

bool decode_plugin_request(const std::string& line, Eigen::VectorXd* x,
                           std::int64_t* seed) {
  try {
    const json req = json::parse(line);
    const auto& xs = req.at("x");
    x->resize(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      (*x)[static_cast<Eigen::Index>(i)] = xs[i].get<double>();
    }
    *seed = req.at("seed").get<std::int64_t>();
    return true;
  } catch (const json::exception&) {
    return false;
  }
}

std::string encode_plugin_response(const Trajectory& trajectory) {
  json resp;
  resp["t"] = trajectory.times;
  json outputs = json::object();
  for (const auto& [name, series] : trajectory.outputs) {
    outputs[name] = series;
  }
  resp["outputs"] = outputs;
  return resp.dump();
}

Trajectory decode_plugin_response(const std::string& line,
                                  const Eigen::VectorXd& x,
                                  std::int64_t seed) {
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::exception& e) {
    throw SimulatorError(std::string("plugin: unparsable response: ") +
                             e.what(),
                         line);
  }
  Trajectory traj;
  traj.params.assign(x.data(), x.data() + x.size());
  traj.seed = seed;
  try {
    traj.times = resp.at("t").get<std::vector<int>>();
    for (const auto& [name, series] : resp.at("outputs").items()) {
      traj.outputs[name] = series.get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw SimulatorError(std::string("plugin: malformed response: ") + e.what(),
                         line);
  }
  if (traj.outputs.empty()) {
    throw SimulatorError("plugin: response carries no output series", line);
  }
  for (const auto& [name, series] : traj.outputs) {
    if (series.size() != traj.times.size()) {
      throw SimulatorError("plugin: series '" + name +
                               "' length does not match time axis",
                           line);
    }
  }
  return traj;
}

Trajectory external_simulate(const PluginHandle& plugin,
                             const Eigen::VectorXd& x, std::int64_t seed) {
  ignore_sigpipe_once();
  const ChildResult child =
      run_child(plugin.path, encode_plugin_request(x, seed),
                plugin.timeout_seconds);
  if (child.timed_out) {
    throw SimulatorError("plugin: timed out after " +
                             std::to_string(plugin.timeout_seconds) + "s",
                         child.stdout_text);
  }
  if (child.exit_status != 0) {
    throw SimulatorError("plugin: exited with status " +
                             std::to_string(child.exit_status),
                         child.stdout_text);
  }
  std::string first_line = child.stdout_text;
  const auto nl = first_line.find('\n');
  if (nl != std::string::npos) first_line.resize(nl);
  if (first_line.empty()) {
    throw SimulatorError("plugin: empty response", child.stdout_text);
  }
  return decode_plugin_response(first_line, x, seed);
}

}  // namespace trajopt
