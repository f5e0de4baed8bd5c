// Mines one synthetic dataset with MR-Apriori on every backend and prints the
// mean time of three runs per backend.
#include <iostream>

#include "fim/fim.hpp"

int main(int argc, char** argv) {
  fim::SyntheticParams params;
  params.num_transactions = argc > 1 ? std::stoul(argv[1]) : 20000;
  const auto db = fim::generate_synthetic(params);
  const auto minsup = fim::absolute_minsup(0.003, db.size());

  for (auto kind : fim::mr::kAllBackends) {
    fim::mr::Backend backend;
    backend.kind = kind;
    backend.workers = 4;
    std::vector<fim::Duration> times;
    std::size_t found = 0;
    for (int trial = 0; trial < 3; ++trial) {
      auto r = fim::mr_apriori(db, minsup, backend, 16);
      times.push_back(r.elapsed);
      found = r.frequent.size();
    }
    std::cout << fim::mr::to_string(kind) << ": " << fim::to_ms(fim::bench::mean_of(times)) << " ms, " << found
              << " frequent itemsets\n";
  }
}
