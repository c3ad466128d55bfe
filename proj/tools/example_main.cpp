// Runnable examples.
//
//   example payment --requests N [--algorithm NAME]

#include "joins/bench/payment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace joins;

  CLI::App app{"Join pattern matching examples"};
  app.name("example");
  app.require_subcommand(1);

  auto* payment_cmd =
      app.add_subcommand("payment", "Token and payment microservice flows");
  int requests = 3;
  std::string algorithm = "while-lazy";
  payment_cmd->add_option("--requests", requests, "External requests per flow")
      ->default_val(3);
  payment_cmd->add_option("--algorithm", algorithm, "Matching algorithm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    auto algo = algorithm_from_string(algorithm);
    if (!algo) {
      std::string names;
      for (AlgorithmId id : all_algorithms()) names += std::string(" ") + std::string(to_string(id));
      std::cerr << "usage error: unknown algorithm '" << algorithm
                << "'; valid algorithms:" << names << "\n";
      return 2;
    }
    if (requests < 0) {
      std::cerr << "usage error: requests must be >= 0\n";
      return 2;
    }

    std::cout << "== token generation flow (" << requests << " requests) ==\n";
    auto token_cids = bench::payment::run_token_flow(requests, *algo, &std::cout);
    std::cout << "token flow complete:";
    for (auto cid : token_cids) std::cout << " cid=" << cid;
    std::cout << "\n\n== payment flow (" << requests << " requests) ==\n";
    auto payment_cids = bench::payment::run_payment_flow(requests, *algo, &std::cout);
    std::cout << "payment flow complete:";
    for (auto cid : payment_cids) std::cout << " cid=" << cid;
    std::cout << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
