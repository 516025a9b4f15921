// Deterministic rule-name -> color assignment so match highlights keep
// the same hue across refreshes and sessions.

/** FNV-1a hash of the rule name folded onto the color wheel. */
export function hueFor(rule: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < rule.length; i++) {
    h ^= rule.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h % 360;
}

/** CSS color for a rule's highlight; alpha in [0, 1]. */
export function highlightColor(rule: string, alpha = 0.35): string {
  return `hsla(${hueFor(rule)}, 80%, 55%, ${alpha})`;
}
