// deltastar: run one job document and write one result.
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "deltastar/deltastar.hpp"
#include "deltastar/job.hpp"

using namespace deltastar;

namespace {

std::string read_all(std::istream& in) { return {std::istreambuf_iterator<char>(in), {}}; }

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bound states of delta interactions on equilateral stars"};
  std::string job_path = "-", out_path;
  bool verbose = false;
  app.add_option("--job", job_path, "job document (JSON); '-' reads standard input");
  app.add_option("--out", out_path, "output file; overrides output.path, default standard output");
  app.add_flag("--verbose", verbose, "progress and timing on standard error");
  CLI11_PARSE(app, argc, argv);

  JobSpec job;
  try {
    std::string text;
    if (job_path == "-") {
      text = read_all(std::cin);
    } else {
      std::ifstream f(job_path);
      if (!f) {
        std::cerr << "error: cannot open " << job_path << "\n";
        return 2;
      }
      text = read_all(f);
    }
    job = parse_job(text);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (!out_path.empty()) job.path = out_path;

  const auto t0 = std::chrono::steady_clock::now();
  if (verbose) std::cerr << "running " << to_string(job.command) << "\n";
  JobOutput res;
  try {
    res = run_job(job);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? 2 : 3;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (verbose) std::cerr << "done in " << elapsed << " s\n";

  std::ostringstream doc;
  if (job.format == "csv") {
    doc << res.csv;
  } else {
    json j;
    j["job_echo"] = job.echo;
    j["results"] = res.results;
    j["diagnostics"] = res.diagnostics;
    j["versions"] = versions_json();
    j["metadata"] = {{"timestamp", utc_now()}, {"elapsed_seconds", elapsed}};
    write_json(doc, j);
    doc << "\n";
  }
  if (job.path.empty()) {
    std::cout << doc.str();
  } else {
    std::ofstream f(job.path);
    if (!f) {
      std::cerr << "error: cannot write " << job.path << "\n";
      return 3;
    }
    f << doc.str();
  }
  if (res.numerical_failure) {
    std::cerr << "warning: refinement ladder exhausted before e_tol\n";
    return 3;
  }
  return 0;
}
