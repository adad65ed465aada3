/** Rate limiter with a trailing edge: at most one call per interval, and
 * the last value supplied during a blocked window is always delivered. */

export interface Throttled<T> {
  call(value: T): void;
  /** Deliver any pending trailing value immediately. */
  flush(): void;
  cancel(): void;
}

export function throttle<T>(fn: (value: T) => void, intervalMs: number): Throttled<T> {
  let lastFired = -Infinity;
  let pending: { value: T } | null = null;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const fire = (value: T): void => {
    lastFired = Date.now();
    fn(value);
  };

  const onTimer = (): void => {
    timer = null;
    if (pending) {
      const { value } = pending;
      pending = null;
      fire(value);
    }
  };

  return {
    call(value: T): void {
      const now = Date.now();
      const wait = lastFired + intervalMs - now;
      if (wait <= 0 && timer === null) {
        fire(value);
        return;
      }
      pending = { value };
      if (timer === null) timer = setTimeout(onTimer, Math.max(wait, 0));
    },
    flush(): void {
      if (timer !== null) {
        clearTimeout(timer);
        timer = null;
      }
      if (pending) {
        const { value } = pending;
        pending = null;
        fire(value);
      }
    },
    cancel(): void {
      if (timer !== null) clearTimeout(timer);
      timer = null;
      pending = null;
    },
  };
}
