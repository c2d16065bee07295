float u[N], v[N], w[N], s;

for (int i = 0; i < N; i++) {
    v[i] = s * u[i];
}
for (int i = 0; i < N; i++) {
    w[i] = u[i] + v[i];
}
