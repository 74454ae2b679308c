// Parsing and client-side validation of experimenter-supplied trajectories.
// Rows are "t, x, v" (CSV paste or file); validation failures never reach the
// service.

export interface ParseResult {
  rows: number[][] | null;
  error: string | null;
}

const START_TOL = 1e-6;

export function parseTrajectoryCsv(text: string): ParseResult {
  const trimmed = text.trim();
  if (!trimmed) {
    return { rows: null, error: null }; // empty input = label-only observation
  }
  const rows: number[][] = [];
  const lines = trimmed.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const fields = line.split(/[,;\s]+/).filter((p) => p.length > 0);
    if (i === 0 && fields.every((f) => !Number.isFinite(Number(f)))) {
      continue; // header row like "t,x,v"
    }
    const parts = fields;
    if (parts.length !== 3) {
      return { rows: null, error: `line ${i + 1}: expected 3 columns (t, x, v), got ${parts.length}` };
    }
    const nums = parts.map(Number);
    if (nums.some((v) => !Number.isFinite(v))) {
      return { rows: null, error: `line ${i + 1}: non-numeric value` };
    }
    rows.push(nums);
  }
  if (rows.length === 0) {
    return { rows: null, error: 'no data rows found' };
  }
  for (let i = 1; i < rows.length; i++) {
    if (rows[i][0] <= rows[i - 1][0]) {
      return { rows: null, error: `line times must increase strictly (row ${i + 1})` };
    }
  }
  return { rows, error: null };
}

export function validateStart(
  rows: number[][],
  suggested: [number, number],
): string | null {
  const dx = Math.abs(rows[0][1] - suggested[0]);
  const dv = Math.abs(rows[0][2] - suggested[1]);
  if (dx > START_TOL || dv > START_TOL) {
    return (
      `trajectory starts at (${rows[0][1]}, ${rows[0][2]}) but the suggested ` +
      `initial condition is (${suggested[0]}, ${suggested[1]})`
    );
  }
  return null;
}
