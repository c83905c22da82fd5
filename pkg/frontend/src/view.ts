/** Pure view-model formatting for the verdict panel.
 *
 * Numbers shown to the user are formatted straight from the service
 * response — nothing is recomputed client-side.
 */

import { PredictResponse } from "./api.js";

export interface BarRow {
  source: string;
  healthyPct: string;
  parkinsonPct: string;
  /** bar widths in percent, numeric for styling */
  healthyWidth: number;
  parkinsonWidth: number;
}

export interface VerdictView {
  label: string;
  confidencePct: string;
  winningSource: string;
  bars: BarRow[];
}

/** One decimal percentage point, e.g. 0.934999 -> "93.5%". */
export function formatPercent(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

export function verdictView(resp: PredictResponse): VerdictView {
  const bars: BarRow[] = [];
  for (const source of ["spiral", "wave"] as const) {
    const probs = resp.per_model[source];
    if (!probs) continue;
    bars.push({
      source,
      healthyPct: formatPercent(probs.healthy),
      parkinsonPct: formatPercent(probs.parkinson),
      healthyWidth: probs.healthy * 100,
      parkinsonWidth: probs.parkinson * 100,
    });
  }
  return {
    label: resp.label,
    confidencePct: formatPercent(resp.confidence),
    winningSource: resp.winning_source,
    bars,
  };
}
