package demo;

import javax.crypto.SecretKey;

public class Client {
    private final CryptoWrapper wrapper = new CryptoWrapper();

    public byte[] modern(SecretKey key, byte[] data) throws Exception {
        return wrapper.encrypt("AES/GCM/NoPadding", key, data);
    }

    public byte[] legacy(SecretKey key, byte[] data) throws Exception {
        return wrapper.encrypt("DES/ECB/PKCS5Padding", key, data);
    }
}
