float x[N], y[N], a;

for (int i = 0; i < N; i++) {
    y[i] += a * x[i];
}
