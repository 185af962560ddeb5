import threadpoolctl

# small-matrix workloads throughout; multithreaded BLAS only adds overhead
threadpoolctl.threadpool_limits(limits=1, user_api="blas")
