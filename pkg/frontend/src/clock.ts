// Monotonic time source. Response times must never go backwards, so the
// wall clock (Date.now) is not an option.

export interface Clock {
  /** Milliseconds from an arbitrary, monotonically increasing origin. */
  now(): number;
}

export class PerformanceClock implements Clock {
  now(): number {
    return performance.now();
  }
}
