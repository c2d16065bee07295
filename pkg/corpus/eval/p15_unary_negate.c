float v[N], w[N], z[N];

for (int i = 0; i < N; i++) {
    w[i] = -v[i];
}
for (int i = 0; i < N; i++) {
    z[i] = -w[i];
}
