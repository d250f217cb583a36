// Disabled-while-pending rule: a mutating action is suppressed while the
// previous invocation is still in flight, so double clicks issue exactly
// one request.

export class PendingGuard {
  private pending = false;

  get isPending(): boolean {
    return this.pending;
  }

  async run<T>(action: () => Promise<T>): Promise<T | undefined> {
    if (this.pending) {
      return undefined;
    }
    this.pending = true;
    try {
      return await action();
    } finally {
      this.pending = false;
    }
  }
}
