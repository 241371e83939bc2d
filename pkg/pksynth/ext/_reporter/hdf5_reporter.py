"""
HDF5 storage of solver iterates.
"""
from typing import Optional

import h5py
from torch.utils import data

from ... import Reporter, Context, __version__

__all__ = ["HDF5Reporter",
           "IterateDataset"]


class HDF5Reporter(Reporter):
    """ HDF5 reporter for the k-space iterate of a SAKE solve.

        Parameters
        ----------
            solver : SakeSolver
                The solver whose iterates are stored; fixes the shape.
            filebase : string
                Path of the hdf5 file without the ``.h5`` suffix.
            metadata : dictionary
                Optional metadata saved as string attributes.
                >>> metadata = {"contrast": "T2", "mask": "poisson2d"}
            interval : integer
                The iterate is saved every "interval" iterations.

        Examples
        --------
        >>> import pksynth as pk
        >>> solver = pk.SakeSolver(acquired, mask, pk.SakeConfig())
        >>> solver.reporter.append(pk.HDF5Reporter(solver, interval=5,
        >>>                                        filebase="./iterates"))
        >>> solver()
        """

    def __init__(self, solver, interval=1, filebase='./output',
                 metadata=None):
        self.interval = interval
        self.filebase = filebase
        self.shape = tuple(solver.x.shape)
        with h5py.File(str(self.filebase) + '.h5', 'w') as fs:
            fs.attrs['pksynth_version'] = __version__
            fs.attrs['window'] = list(solver.cfg.hankel.window)
            fs.attrs['rank'] = solver.rank
            if metadata:
                for attr in metadata:
                    fs.attrs[attr] = str(metadata[attr])
            fs.create_dataset(name="x", shape=(0, *self.shape),
                              maxshape=(None, *self.shape),
                              dtype=Context.convert_to_ndarray(
                                  solver.x).dtype)
            fs.create_dataset(name="iteration", shape=(0,), maxshape=(None,),
                              dtype='i8')

    def __call__(self, solver: 'SakeSolver'):
        if solver.iteration % self.interval == 0:
            with h5py.File(str(self.filebase) + '.h5', 'r+') as fs:
                count = fs["x"].shape[0] + 1
                fs["x"].resize(count, axis=0)
                fs["x"][-1, ...] = Context.convert_to_ndarray(solver.x)
                fs["iteration"].resize(count, axis=0)
                fs["iteration"][-1] = solver.iteration
                fs.attrs['data'] = str(count)


class IterateDataset(data.Dataset):
    """ Dataset over the iterates stored by an HDF5Reporter that can be
        used by torch's dataloader.

    Parameters
    ----------
        filebase : string
            Path to the hdf5 file.
        transform : callable
            Optional transform applied to every loaded iterate.
        target : bool
            Returns also the iterate at idx + skip_idx_to_target.
        skip_idx_to_target : integer
            Offset of the target iterate if target is True - default=1
    """

    def __init__(self, filebase, transform=None, target=False,
                 skip_idx_to_target=1, context: Optional[Context] = None):
        super().__init__()
        self.filebase = filebase
        self.transform = transform
        self.target = target
        self.skip_idx_to_target = skip_idx_to_target
        self.context = context or Context()
        self.fs = h5py.File(self.filebase, "r")
        self.shape = self.fs["x"].shape
        self.iterations = self.fs["iteration"][...].tolist()

    def __len__(self):
        return (self.shape[0] - self.skip_idx_to_target if self.target
                else self.shape[0])

    def __getitem__(self, idx):
        x = self.get_data(idx)
        target = []
        if self.target:
            target = self.get_data(idx + self.skip_idx_to_target)
        if self.transform:
            x = self.transform(x)
            if self.target:
                target = self.transform(target)
        return (x, target, idx) if self.target else (x, idx)

    def __del__(self):
        if getattr(self, 'fs', None) is not None:
            self.fs.close()

    def get_data(self, idx):
        return self.context.convert_to_tensor(self.fs["x"][idx])
