// Dollar helpers: the service only accepts granularity-multiple integers.

export function snap(dollars: number, granularity: number): number {
  return Math.round(dollars / granularity) * granularity;
}

export function clampAmount(dollars: number, max: number): number {
  return Math.min(Math.max(dollars, 0), max);
}

export function formatDollars(n: number): string {
  return "$" + n.toLocaleString("en-US");
}
