// Presentation helpers. These format server-provided numbers; nothing here
// recomputes a score.

import { RankedMacro, RouteDecision, StatsRow } from "./api.js";

export function rawRateLabel(row: Pick<StatsRow, "successes" | "attempts">): string {
  if (row.attempts === 0) {
    return "no data";
  }
  const percent = Math.round((row.successes / row.attempts) * 100);
  return `${row.successes}/${row.attempts} (${percent}%)`;
}

export function smoothedLabel(smoothedRate: number): string {
  return smoothedRate.toFixed(3);
}

export function scoreLabel(score: number): string {
  return score.toFixed(4);
}

export function decisionBadge(decision: RouteDecision): string {
  switch (decision.kind) {
    case "matched":
      return `Matched ${decision.macro_name} @ ${scoreLabel(decision.score)}`;
    case "needs_training":
      return "Needs training";
    default:
      return `No match (best ${scoreLabel(decision.best_score)})`;
  }
}

export interface ThresholdSplit {
  above: RankedMacro[];
  below: RankedMacro[];
}

export function splitAtThreshold(ranked: RankedMacro[], theta: number): ThresholdSplit {
  return {
    above: ranked.filter((r) => r.blended >= theta),
    below: ranked.filter((r) => r.blended < theta),
  };
}
