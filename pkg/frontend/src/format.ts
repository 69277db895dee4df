// Number formatting matching the backend's CSV writer (C printf "%.9g"),
// so an exported session is byte-identical to the server-side report.

const PRECISION = 9;

export function g9(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  if (x === 0) return "0";
  const sign = x < 0 ? "-" : "";
  // toExponential gives the correctly rounded decimal digits of the double.
  const [mantissa, expPart] = Math.abs(x).toExponential(PRECISION - 1).split("e");
  const exp = parseInt(expPart, 10);
  const digits = mantissa.replace(".", "");

  if (exp < -4 || exp >= PRECISION) {
    // exponential form, trailing zeros stripped, two-digit exponent minimum
    const frac = digits.slice(1).replace(/0+$/, "");
    const expAbs = String(Math.abs(exp)).padStart(2, "0");
    const expStr = (exp < 0 ? "e-" : "e+") + expAbs;
    return sign + digits[0] + (frac ? "." + frac : "") + expStr;
  }
  if (exp >= 0) {
    const intPart = digits.slice(0, exp + 1);
    const frac = digits.slice(exp + 1).replace(/0+$/, "");
    return sign + intPart + (frac ? "." + frac : "");
  }
  const frac = ("0".repeat(-exp - 1) + digits).replace(/0+$/, "");
  return sign + "0." + frac;
}

export function percent(p: number): string {
  return (p * 100).toFixed(1) + "%";
}
