#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace mstd {

/// Two readings of the simulated-trading rule.
/// Position: trade in the predicted direction, so a correct directional
/// call earns |dx| and a wrong one loses it. Indicator: profit only when
/// the predicted class matches the true class, signed by the raw move.
enum class ProfitMode { Position, Indicator };

struct LedgerRow {
  int pred = 0;
  int truth = 0;
  double delta = 0.0;  // after zeroing still-class moves
  int position = 0;    // +1 long, -1 short, 0 flat
  double profit = 0.0;
  double cum_profit = 0.0;
};

struct BacktestLedger {
  std::vector<LedgerRow> rows;
  double total() const {
    return rows.empty() ? 0.0 : rows.back().cum_profit;
  }
};

/// One unit per signal, zero transaction cost, no carry-over. The change
/// value of still-class samples is set to zero before accounting.
BacktestLedger simulate(std::span<const int> preds,
                        std::span<const int> truths,
                        std::span<const double> deltas, ProfitMode mode);

/// Buy at the first price, sell at the last.
double buy_and_hold(std::span<const double> prices);

/// CSV: step,pred,truth,delta,position,profit,cum_profit
void write_ledger_csv(const BacktestLedger& ledger,
                      const std::filesystem::path& path);

}  // namespace mstd
