import torch
import numpy as np

from typing import List, Optional, Union

__all__ = ['Context']


class Context:
    """Device and precision shared by every tensor of a reconstruction.

    The real dtype decides the complex dtype of k-space data
    (float32 -> complex64, float64 -> complex128). Double precision is the
    default because the operator identities are checked to 1e-12.
    """

    def __init__(self, device: Optional[torch.device | str] = None,
                 dtype: Optional[torch.dtype] = None):
        if device is None:
            device = torch.device('cpu')
        elif 'cuda' in str(device):
            assert torch.cuda.is_available(), \
                ('cuda device explicitly requested but '
                 'cuda is not available!')
        else:
            assert 'cpu' in str(device), \
                (f"pksynth is designed to work on cpu or cuda devices. "
                 f"{device} is not supported!")

        dtype = dtype or torch.float64
        assert dtype in [torch.float32, torch.float64], \
            (f"pksynth is designed to work with 32 and 64 bit floats. "
             f"{dtype} is not supported!")

        self.device = torch.device(device)
        self.dtype = dtype

    @property
    def complex_dtype(self) -> torch.dtype:
        return (torch.complex128 if self.dtype == torch.float64
                else torch.complex64)

    def zero_tensor(self, size: Union[List[int], torch.Size], *args,
                    dtype=None, **kwargs) -> torch.Tensor:
        return torch.zeros(size, *args, **kwargs, device=self.device,
                           dtype=(dtype or self.dtype))

    def one_tensor(self, size: Union[List[int], torch.Size], *args, dtype=None,
                   **kwargs) -> torch.Tensor:
        return torch.ones(size, *args, **kwargs, device=self.device,
                          dtype=(dtype or self.dtype))

    def convert_to_tensor(self, array, *args,
                          dtype: Optional[torch.dtype] = None, **kwargs
                          ) -> torch.Tensor:
        new_dtype = dtype
        if dtype is None:
            if hasattr(array, 'dtype'):
                if array.dtype in [bool, np.bool_, torch.bool]:
                    new_dtype = torch.bool
                elif (np.iscomplexobj(array) if isinstance(array, np.ndarray)
                      else (isinstance(array, torch.Tensor)
                            and array.is_complex())):
                    new_dtype = self.complex_dtype
                else:
                    new_dtype = self.dtype
            else:
                new_dtype = self.dtype

        if isinstance(array, torch.Tensor):
            return array.to(*args, **kwargs, device=self.device,
                            dtype=new_dtype)
        else:
            return torch.as_tensor(np.asarray(array), *args, **kwargs,
                                   device=self.device, dtype=new_dtype)

    def convert_to_complex(self, array) -> torch.Tensor:
        return self.convert_to_tensor(array, dtype=self.complex_dtype)

    @staticmethod
    def convert_to_ndarray(tensor: Union[torch.Tensor, List]) -> np.ndarray:
        if isinstance(tensor, torch.Tensor):
            return tensor.detach().cpu().numpy()
        else:
            return np.array(tensor)
