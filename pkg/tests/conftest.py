import os

# Pin BLAS threading before numpy loads anywhere, so reductions keep a
# fixed summation order and runs are bit-reproducible.
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
