float v[N], acc, a;

#pragma polca fold F a v acc
for (int i = 0; i < N; i++)
#pragma polca def F
#pragma polca input v[i]
#pragma polca output acc
    acc = acc + v[i];
