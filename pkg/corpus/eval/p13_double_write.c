float u[N], w[N], z[N], s;

for (int i = 0; i < N; i++) {
    w[i] = u[i] + s;
    z[i] = u[i] - s;
}
for (int i = 0; i < N; i++) {
    u[i] = 2 * u[i];
}
