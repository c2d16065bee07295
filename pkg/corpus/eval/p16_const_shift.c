float v[N], w[N];

for (int i = 0; i < N; i++) {
    w[i] = v[i] + 1;
}
for (int i = 0; i < N; i++) {
    w[i] = w[i] * 2;
}
