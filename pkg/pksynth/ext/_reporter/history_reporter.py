import csv
import sys

from ... import Reporter

__all__ = ['HistoryReporter']


class HistoryReporter(Reporter):
    """Tracks convergence of a solve: iteration, relative change and the
    largest deviation from the acquired samples.

    ``out`` may be a list (entries are appended), an open text stream or a
    path, in which case the history is written as CSV.
    """
    columns = ('iteration', 'rel_change', 'data_residual')

    def __init__(self, interval=1, out=None):
        super().__init__(interval)
        self.out = [] if out is None else out
        self._path = None
        if isinstance(self.out, str) or hasattr(self.out, '__fspath__'):
            self._path = self.out
            with open(self._path, 'w', newline='') as fs:
                csv.writer(fs).writerow(self.columns)
        elif not isinstance(self.out, list):
            print(*self.columns, file=self.out)

    def __call__(self, solver: 'SakeSolver'):
        if solver.iteration % self.interval == 0:
            entry = [solver.iteration, solver.rel_change,
                     solver.data_residual()]
            if isinstance(self.out, list):
                self.out.append(entry)
            elif self._path is not None:
                with open(self._path, 'a', newline='') as fs:
                    csv.writer(fs).writerow(entry)
            else:
                print(*entry, file=self.out or sys.stdout)
