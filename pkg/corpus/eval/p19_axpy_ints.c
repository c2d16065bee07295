int x[N], y[N], a;

for (int i = 0; i < N; i++) {
    y[i] += a * x[i];
}
for (int i = 0; i < N; i++) {
    x[i] = x[i] + y[i];
}
