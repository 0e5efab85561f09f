/** Amount rendering over decimal strings. BigInt end to end: formatting a
 * base-unit amount must round-trip exactly, so floats are banned here. */

const WEI_PER_ETH = 10n ** 18n;

/** "10000000000000000" -> "0.01"; trims trailing zeros, keeps at least one
 * integer digit. Accepts only decimal-string base units. */
export function formatEth(baseUnits: string): string {
  const value = BigInt(baseUnits);
  const negative = value < 0n;
  const magnitude = negative ? -value : value;
  const whole = magnitude / WEI_PER_ETH;
  const frac = (magnitude % WEI_PER_ETH).toString().padStart(18, "0")
    .replace(/0+$/, "");
  const body = frac ? `${whole}.${frac}` : `${whole}`;
  return negative ? `-${body}` : body;
}

/** "0.01" -> "10000000000000000"; rejects more than 18 fractional digits. */
export function parseEth(text: string): string {
  const match = /^(\d+)(?:\.(\d+))?$/.exec(text.trim());
  if (!match) throw new Error(`not a decimal amount: ${text}`);
  const [, whole, frac = ""] = match;
  if (frac.length > 18) throw new Error("finer than one base unit");
  return (BigInt(whole) * WEI_PER_ETH + BigInt(frac.padEnd(18, "0"))).toString();
}

/** Group a whole-number decimal string: "1000000" -> "1,000,000". */
export function groupDigits(value: string): string {
  return value.replace(/\B(?=(\d{3})+(?!\d))/g, ",");
}

export function shortAddress(address: string): string {
  return address.length > 12
    ? `${address.slice(0, 8)}…${address.slice(-4)}`
    : address;
}

export function shortId(id: string): string {
  return id.length > 14 ? `${id.slice(0, 10)}…${id.slice(-4)}` : id;
}
