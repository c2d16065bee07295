float u[N], v[N], w[N], z[N];

for (int i = 0; i < N; i++) {
    v[i] = u[i] + 1;
}
for (int i = 0; i < N; i++) {
    w[i] = u[i] + 2;
}
for (int i = 0; i < N; i++) {
    z[i] = u[i] + 3;
}
