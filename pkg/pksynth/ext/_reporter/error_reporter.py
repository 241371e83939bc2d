import sys

import torch

from ... import Reporter, KSpaceVolume, rss_combine, ifft2c

__all__ = ['ErrorReporter']


class ErrorReporter(Reporter):
    """Reports the relative error of the iterate against a reference
    k-space, both in k-space and on the coil-combined magnitude."""

    def __init__(self, reference: KSpaceVolume, interval=1, out=sys.stdout):
        Reporter.__init__(self, interval)
        self.reference = reference.data
        self.reference_image = rss_combine(ifft2c(self.reference))
        self.out = [] if out is None else out
        if not isinstance(self.out, list):
            print("#iteration  error_kspace  error_image", file=self.out)

    def __call__(self, solver: 'SakeSolver'):
        if solver.iteration % self.interval == 0:
            x = solver.x
            err_k = (torch.linalg.vector_norm(x - self.reference)
                     / torch.linalg.vector_norm(self.reference))
            image = rss_combine(ifft2c(x))
            err_i = (torch.linalg.vector_norm(image - self.reference_image)
                     / torch.linalg.vector_norm(self.reference_image))
            entry = [solver.iteration, err_k.item(), err_i.item()]
            if isinstance(self.out, list):
                self.out.append(entry)
            else:
                print(*entry, file=self.out)
