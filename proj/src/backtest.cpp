#include "mstd/backtest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mstd/dataset.hpp"
#include "mstd/errors.hpp"

namespace mstd {

BacktestLedger simulate(std::span<const int> preds,
                        std::span<const int> truths,
                        std::span<const double> deltas, ProfitMode mode) {
  if (preds.size() != truths.size() || preds.size() != deltas.size()) {
    throw std::invalid_argument("simulate: length mismatch");
  }
  BacktestLedger ledger;
  ledger.rows.reserve(preds.size());
  double cum = 0.0;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    LedgerRow row;
    row.pred = preds[t];
    row.truth = truths[t];
    row.delta = truths[t] == kStill ? 0.0 : deltas[t];
    row.position = preds[t] == kUp ? 1 : preds[t] == kDown ? -1 : 0;
    if (mode == ProfitMode::Position) {
      row.profit = row.position * row.delta;
    } else {
      row.profit = preds[t] == truths[t] ? row.delta : 0.0;
    }
    cum += row.profit;
    row.cum_profit = cum;
    ledger.rows.push_back(row);
  }
  return ledger;
}

double buy_and_hold(std::span<const double> prices) {
  if (prices.size() < 2) {
    throw std::invalid_argument("buy_and_hold: need at least 2 prices");
  }
  return prices.back() - prices.front();
}

void write_ledger_csv(const BacktestLedger& ledger,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("ledger: cannot write " + path.string());
  out << "step,pred,truth,delta,position,profit,cum_profit\n";
  char buf[160];
  for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
    const LedgerRow& r = ledger.rows[i];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.17g,%d,%.17g,%.17g\n", i,
                  r.pred, r.truth, r.delta, r.position, r.profit,
                  r.cum_profit);
    out << buf;
  }
  if (!out) throw DataError("ledger: write failed for " + path.string());
}

}  // namespace mstd
