/** Label helpers. The authoritative list always comes from the service's
 * /meta endpoint; the console never invents label strings of its own. */

export class LabelSet {
  readonly labels: readonly string[];
  readonly waitLabel: string;
  readonly defaultTeacherLabel: string;

  constructor(labels: string[]) {
    if (labels.length !== 8 || new Set(labels).size !== 8) {
      throw new Error(`expected 8 distinct labels from the service, got ${labels.length}`);
    }
    this.labels = labels;
    // index order is canonical: position 0 is the generic "no move" tag,
    // position 1 is the student-speaking tag
    this.defaultTeacherLabel = labels[0]!;
    this.waitLabel = labels[1]!;
  }

  has(label: string): boolean {
    return this.labels.includes(label);
  }

  /** Teacher turns may carry any tag except the student-speaking one. */
  teacherChoices(): string[] {
    return this.labels.filter((l) => l !== this.waitLabel);
  }
}
