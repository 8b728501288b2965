// SPDX-License-Identifier: Apache-2.0
//
// Standalone mock VLM + encoder server for trying the CLI without GPUs.
//   serval-mock --port 8077 [--script mock_script.json] [--dim 8]
#include <CLI11.hpp>
#include <csignal>
#include <iostream>
#include <thread>

#include "mock_endpoints.hpp"

namespace {
volatile std::sig_atomic_t stop_requested = 0;
}

int main(int argc, char** argv) {
  CLI::App app{"Scripted mock of the VLM and encoder endpoints"};
  int port = 8077;
  std::string script;
  std::size_t dim = 8;
  app.add_option("--port", port, "Port on 127.0.0.1");
  app.add_option("--script", script, "JSON script; image paths are relative to its directory");
  app.add_option("--dim", dim, "Dimension of unscripted dense vectors");
  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, [](int) { stop_requested = 1; });
  std::signal(SIGTERM, [](int) { stop_requested = 1; });

  try {
    serval::testing::MockEndpoints mock(port);
    mock.set_default_dim(dim);
    if (!script.empty()) {
      mock.load_script(script, std::filesystem::path(script).parent_path());
    }
    std::cout << "listening on " << mock.base_url() << std::endl;
    while (!stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    std::cout << mock.total_requests() << " requests served" << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
