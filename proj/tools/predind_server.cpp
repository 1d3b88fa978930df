#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <string>

#include "predind/service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Predicate induction HTTP service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_upload_mb = 50;
  int budget_s = 30;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "listen port");
  app.add_option("--max-upload-mb", max_upload_mb, "CSV upload size cap in MiB");
  app.add_option("--query-budget", budget_s, "per-query compute budget in seconds");
  CLI11_PARSE(app, argc, argv);

  predind::ServiceOptions options;
  options.max_upload_bytes = max_upload_mb * 1024 * 1024;
  options.query_budget = std::chrono::seconds(budget_s);
  predind::Service service(options);
  httplib::Server server;
  service.mount(server);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}
